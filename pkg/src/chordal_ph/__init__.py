"""Persistent homology of the chordal distance transform of closed loops."""
from .geometry import (SegmentPairMin, cayley_menger_sq_volume, point_segment_min,
                       segment_segment_min, sq_distance)
from .loop import (LoopError, LoopParam, NondegeneracyReport, PolyLoop, build_loop,
                   check_nondegeneracy, eval_T, sample_curve)
from .nerve import MorseSet, NerveComplex, NerveError, build_nerve, collapse_nerve, morse_sets
from .persistence import (ConleyIndex, FilteredComplex, PersistenceDiagram, bottleneck,
                          compute_persistence, conley_index, square_map,
                          verify_maxmin_structure)

__version__ = "0.1.0"
