"""Series-level consistency of key attributes."""
