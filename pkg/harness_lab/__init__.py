"""Wilson 6-j Markov chains, quadratic harnesses and exact verification suites."""

__version__ = "1.0.0"
