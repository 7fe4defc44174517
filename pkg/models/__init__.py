"""Modelos y schemas del proyecto."""