"""Rank-bounded invariant linear regression (C++ core)."""

from ._invlr import (
    GroupRep,
    InvlrError,
    Solution,
    augmented_relu_ntk,
    c4_image_rotation,
    critical_points,
    cyclic_permutation,
    group_average,
    group_elements,
    invariance_constraint,
    invariant_basis,
    make_synthetic,
    read_matrix,
    regularization_path,
    relu_ntk,
    rep_from_generator,
    rotation2d,
    solve,
    train,
    write_matrix,
)

__all__ = [
    "GroupRep",
    "InvlrError",
    "Solution",
    "augmented_relu_ntk",
    "c4_image_rotation",
    "critical_points",
    "cyclic_permutation",
    "group_average",
    "group_elements",
    "invariance_constraint",
    "invariant_basis",
    "make_synthetic",
    "read_matrix",
    "regularization_path",
    "relu_ntk",
    "rep_from_generator",
    "rotation2d",
    "solve",
    "train",
    "write_matrix",
]
