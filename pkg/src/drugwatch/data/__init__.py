"""Packaged data files: stopword list and seed slang lexicon."""
