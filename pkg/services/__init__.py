"""Servicios del proyecto."""