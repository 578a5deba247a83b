"""Command-line front end (``mkelab``)."""
