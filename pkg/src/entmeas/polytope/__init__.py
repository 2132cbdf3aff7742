"""Classical correlation polytope: vertices, facets, membership and the integer scan."""
from .facets import (Facet, FacetEnumerationError, affine_rank, enumerate_facets, facet_classes,
                     is_facet,
                     is_positivity_facet, tight_vertices)
from .scan import scan_candidates, scan_integer_witnesses
from .vertices import (MembershipResult, StrategyVertex, classical_max, enumerate_vertices,
                       membership, vertex_matrix)
