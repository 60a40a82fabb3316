from prefmcs.cli import main

main()
