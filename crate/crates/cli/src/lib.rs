//! Command-line front end (placeholder during bring-up).
