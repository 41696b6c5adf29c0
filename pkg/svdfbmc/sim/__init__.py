"""Monte Carlo simulation harness."""
