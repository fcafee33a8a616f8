"""Run the acceptance criteria outside pytest and print one line each.

    python3 scripts/run_acceptance.py [numbers...]

Exit status is 0 when every selected criterion passes, 1 otherwise.
"""

import pathlib
import sys

TESTS = pathlib.Path(__file__).resolve().parent.parent / "tests"
sys.path.insert(0, str(TESTS))

from test_acceptance import CRITERIA, run_criterion  # noqa: E402


def main(argv):
    wanted = {int(a) for a in argv}
    ok_all = True
    for number, title, fn, budget in CRITERIA:
        if wanted and number not in wanted:
            continue
        ok, line = run_criterion(number, title, fn, budget)
        print(line, flush=True)
        ok_all &= ok
    return 0 if ok_all else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
