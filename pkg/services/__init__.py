"""Services package: lattice, coset, ideal, search, ECDP, channel and runner logic."""
