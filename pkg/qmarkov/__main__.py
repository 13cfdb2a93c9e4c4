from qmarkov.cli import main

raise SystemExit(main())
