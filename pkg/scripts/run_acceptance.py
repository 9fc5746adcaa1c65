"""Run the eleven acceptance criteria and print one line each; exit 3 if any fail."""
import sys

from frontlab.acceptance import run_all

if __name__ == "__main__":
    results = run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failed {failed}" if failed else ""))
    sys.exit(3 if failed else 0)
