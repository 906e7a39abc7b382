"""Simulator for Bluetooth-style pairing and mutual authentication.

A deterministic toolkit for reproducing relay and impersonation attacks on
challenge-response link authentication, comparing three handshake variants
(immediate mutual, response-withholding, and Diffie-Hellman hardened) under
a man-in-the-middle intruder, and evaluating delay-based relay detection.
"""

__version__ = "0.1.0"
