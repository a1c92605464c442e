"""Redundancy (UVA) and stability (bootEGA) reduction."""

from netscale.reduction.bootega import BootReport, run_boot, stability_reduce
from netscale.reduction.uva import UvaReport, uva_reduce, wto_matrix

__all__ = ["uva_reduce", "wto_matrix", "UvaReport", "run_boot", "stability_reduce", "BootReport"]
