"""Lie sphere geometry and submanifold curvature toolkit."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .minkowski import (  # noqa: F401
    OrthogonalMap,
    ProjectivePoint,
    Signature,
    SignedVector,
    inner,
    projective_equal,
)
from .algebras import AlgebraElement, HermitianMatrix3, hermitian_projector, multiply  # noqa: F401
from .immersion import (  # noqa: F401
    FundamentalForms,
    ImmersionChart,
    ShapeSpectrum,
    fundamental_forms,
    principal_spectrum,
    shape_operator,
)
from .charts import (  # noqa: F401
    CHART_NAMES,
    builtin_chart,
    clifford_torus,
    envelope_chart,
    envelope_residuals,
    generalized_cylinder_chart,
    mobius_deform,
    round_sphere,
    veronese,
)
from .classifiers import (  # noqa: F401
    ClassificationReport,
    SamplePlan,
    antipodal_symmetry_check,
    classify,
    cpc_check,
    dupin_check,
    make_plan,
    umbilicity_class,
    unipotent_check,
)
from .liesphere import (  # noqa: F401
    LieTransformation,
    OrientedSphere,
    cecil_chern_decompose,
    oriented_contact,
    parallel_transformation,
    sphere_to_quadric,
    quadric_to_sphere,
)
from .legendre import (  # noqa: F401
    INFINITE,
    LegendreLift,
    apply_lie_to_lift,
    curvature_spheres,
    focal_detect,
    legendre_lift,
    reducibility_rank,
    tube_chart,
)
