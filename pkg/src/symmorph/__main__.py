from symmorph.cli import main

raise SystemExit(main())
