"""Versioned prompt templates for the LLM annotator."""
