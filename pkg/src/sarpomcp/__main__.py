"""Run the SarPomcp command line interface."""

from sarpomcp.cli import main

raise SystemExit(main())
