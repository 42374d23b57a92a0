"""Command-line application: run sweeps, summarize results, list presets and strategies."""
