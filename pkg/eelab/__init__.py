"""
eelab - Entanglement Entropy Laboratory

Detta paket beräknar entanglemententropier för kvasifria Fermigaser, både för
den fria Schrödingeroperatorn och för kompakt störda operatorer H = -Δ + V,
och kontrollerar de operatorolikheter som stabilitetsresultatet vilar på.
"""

__version__ = "0.1.0"
