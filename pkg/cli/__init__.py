"""Interfaz de línea de comandos del toolkit."""
