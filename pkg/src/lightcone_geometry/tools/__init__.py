"""MCP tool definitions for the light-cone surface toolkit."""

from mcp.server.fastmcp import FastMCP

mcp = FastMCP(
    "lightcone-geometry",
    "Conformal invariants, Blaschke pairs and minimal-surface recovery for timelike surfaces",
)

# Import tool modules to register @mcp.tool() decorators via side-effect
from . import geometry_tools  # noqa: F401, E402
