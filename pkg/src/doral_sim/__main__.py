from doral_sim.harness.cli import main

raise SystemExit(main())
