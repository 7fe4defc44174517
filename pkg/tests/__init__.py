"""Tests del proyecto."""