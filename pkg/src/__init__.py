"""Code for the Watchlist-Data project."""
