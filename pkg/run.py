from cli.lab_cli import cli

if __name__ == "__main__":
    """
    Main entry point of the lab.

    Parses the command line and runs one experiment command; see
    `python run.py --help`.
    """
    cli()
