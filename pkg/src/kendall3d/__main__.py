from kendall3d.cli import main

main()
