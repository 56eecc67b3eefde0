"""Resource, feedback and trust-provider contracts executed during block production."""
