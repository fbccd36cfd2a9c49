# main.py

"""
The command-line entry point for GU Local Models.

Runs one experiment (census, admissible set, center check, ...) and writes its
report. All work happens in `gulocal.cli`; this launcher only exists so the
tool can be started from a checkout with `python main.py <command> [flags]`.

- **Environment:** loads a `.env` file from the working directory first, so
  `GULOCAL_*` overrides can live next to the checkout.
- **Exit Status:** 0 when every check passes, 1 on a failed check, 2 on usage
  errors, 3 when an enumeration budget would be exceeded.
"""

# 1. IMPORTS & SETUP ############################################################################################
import sys

from dotenv import load_dotenv

from gulocal.cli import main

load_dotenv()

# 2. MAIN EXECUTION BLOCK #######################################################################################
if __name__ == "__main__":
    sys.exit(main())
