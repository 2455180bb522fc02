"""Command-line front end, benchmark harness and the Gaussian KDE baseline."""
