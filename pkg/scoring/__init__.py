"""Evidence selections, scoring mechanisms and recommendation scores."""
