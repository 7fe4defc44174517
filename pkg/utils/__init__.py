"""Utilidades del proyecto."""