from polycheck.application.cli import main

raise SystemExit(main())
