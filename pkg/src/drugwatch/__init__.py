"""drugwatch: detect drug mentions and overdose symptoms in social-media posts.

Pipeline pieces: corpus IO and filtering, text normalization with a slang
lexicon, TF-IDF features, from-scratch classifiers (multi-class drug
prediction and one-vs-rest symptom prediction), evaluation metrics with
Fleiss' kappa, and a human+LLM annotation queue with an HTTP review service.
"""

__version__ = "0.1.0"

from .labels import DRUG_CLASSES, FLAGS, SymptomVocabulary, default_vocabulary

__all__ = ["__version__", "DRUG_CLASSES", "FLAGS", "SymptomVocabulary",
           "default_vocabulary"]
