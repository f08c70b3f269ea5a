from privwrap.cli import main

main()
