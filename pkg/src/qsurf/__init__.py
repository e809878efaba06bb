"""Exact quantum coordinate algebras on triangulated surfaces.

Subpackages cover: scaled-integer coefficient arithmetic (:mod:`qsurf.coeff`),
exchange quivers and their mutations (:mod:`qsurf.quiver`), the cube-root
quantum torus (:mod:`qsurf.qtorus`), triangulated surfaces with flips and
cutting (:mod:`qsurf.surface`), balance conditions on fractional exponents
(:mod:`qsurf.balance`), quantum coordinate changes under flips
(:mod:`qsurf.mutation`), trace values of simple webs (:mod:`qsurf.trace`),
and the command-line interface (:mod:`qsurf.cli`).
"""

__version__ = "0.1.0"
