"""Entry point for the lightcone-geometry MCP server."""

from .config import load_tolerances


def main():
    # report unusable LCGEOM_TOL_* values before the stdio loop starts
    load_tolerances()

    from .tools import mcp
    mcp.run()


if __name__ == "__main__":
    main()
