class Infeasible(Exception):
    """Raised by a propagator when the current box contains no feasible point."""
