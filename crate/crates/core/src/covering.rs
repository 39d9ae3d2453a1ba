//! Placeholder; implemented after the explorer.
