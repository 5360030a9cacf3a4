"""Package de tests pour impactgame."""
