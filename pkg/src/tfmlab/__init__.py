"""Laboratoire de vérification des mécanismes de frais de transaction."""

__version__ = "0.1.0"
