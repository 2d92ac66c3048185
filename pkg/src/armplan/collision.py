"""Convex-primitive collision world.

Every primitive is reduced to a *core* plus a radius: spheres and capsules
have a segment core (a sphere is a zero-length segment), boxes are their own
core with radius zero.  Distances between cores are exact:

* segment/segment: closed-form closest points,
* segment/box: endpoints against the box plus the segment against the 12
  box edges (or an intersection test),
* box/box: separating-axis test over the 15 candidate axes; separated boxes
  get the exact vertex/face and edge/edge distance, overlapping boxes report
  minus the minimum axis overlap (the exact penetration depth).

A configuration is in collision iff its minimum signed clearance is <= 0.
"""

from __future__ import annotations

import copy
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .kinematics import RobotModel, frames_batch
from .transforms import RigidTransform

DEFAULT_RESOLUTION = 0.01


# --------------------------------------------------------------------------
# shapes and bodies


@dataclass(frozen=True)
class Sphere:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class Capsule:
    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("capsule radius must be positive")
        object.__setattr__(self, "p0", tuple(float(v) for v in self.p0))
        object.__setattr__(self, "p1", tuple(float(v) for v in self.p1))


@dataclass(frozen=True)
class Box:
    half_extents: tuple[float, float, float]

    def __post_init__(self):
        h = tuple(float(v) for v in self.half_extents)
        if len(h) != 3 or min(h) <= 0:
            raise ValueError("box half-extents must be three positive numbers")
        object.__setattr__(self, "half_extents", h)


Shape = Union[Sphere, Capsule, Box]


class Tag(str, enum.Enum):
    ENVIRONMENT = "Environment"
    USER = "User"
    WORKSPACE_SPHERE = "WorkspaceSphere"


@dataclass(frozen=True)
class CollisionBody:
    id: str
    shape: Shape
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    tag: Tag = Tag.ENVIRONMENT


class SceneSnapshot:
    """Immutable, versioned set of posed collision bodies."""

    __slots__ = ("_version", "_bodies", "_packed")

    def __init__(self, bodies=(), version: int = 0):
        bodies = tuple(bodies)
        ids = [b.id for b in bodies]
        if len(set(ids)) != len(ids):
            raise ValueError("body ids must be unique within a snapshot")
        self._version = int(version)
        self._bodies = bodies
        self._packed = _pack([(b.shape, b.pose) for b in bodies]) if bodies else None

    @property
    def version(self) -> int:
        return self._version

    @property
    def bodies(self) -> tuple[CollisionBody, ...]:
        return self._bodies

    def __setattr__(self, name, value):
        if hasattr(self, "_packed"):
            raise AttributeError("SceneSnapshot is immutable")
        object.__setattr__(self, name, value)

    def __len__(self):
        return len(self._bodies)

    def __repr__(self):
        return f"SceneSnapshot(version={self._version}, bodies={len(self._bodies)})"

    def with_bodies(self, bodies, version: int | None = None) -> SceneSnapshot:
        return SceneSnapshot(bodies, self._version + 1 if version is None else version)

    def body(self, body_id: str) -> CollisionBody:
        for b in self._bodies:
            if b.id == body_id:
                return b
        raise KeyError(body_id)


# --------------------------------------------------------------------------
# packed primitive arrays

_SEG, _BOX = 0, 1


@dataclass
class _Prims:
    kind: np.ndarray  # (M,)
    p0: np.ndarray  # (M, 3) segment core (box: center)
    p1: np.ndarray
    r: np.ndarray  # (M,)
    c: np.ndarray  # (M, 3) box center
    R: np.ndarray  # (M, 3, 3) box axes as columns
    h: np.ndarray  # (M, 3)
    bc: np.ndarray  # (M, 3) bounding-sphere center, inside the shape
    br: np.ndarray  # (M,)

    def take(self, idx) -> _Prims:
        return _Prims(*(getattr(self, f)[idx] for f in _PRIM_FIELDS))


_PRIM_FIELDS = ("kind", "p0", "p1", "r", "c", "R", "h", "bc", "br")


def _local_core(shape: Shape, pose: RigidTransform):
    """(kind, p0, p1, r, c, R, h) for one shape at a pose."""
    R, t = pose.rotation, pose.translation
    if isinstance(shape, Sphere):
        return _SEG, t, t, shape.radius, t, np.eye(3), np.zeros(3)
    if isinstance(shape, Capsule):
        p0 = R @ np.array(shape.p0) + t
        p1 = R @ np.array(shape.p1) + t
        return _SEG, p0, p1, shape.radius, 0.5 * (p0 + p1), np.eye(3), np.zeros(3)
    if isinstance(shape, Box):
        return _BOX, t, t, 0.0, t, R, np.array(shape.half_extents)
    raise TypeError(f"unsupported shape {shape!r}")


def _pack(items) -> _Prims:
    rows = [_local_core(s, p) for s, p in items]
    kind = np.array([r[0] for r in rows], dtype=np.int8)
    p0 = np.array([r[1] for r in rows], dtype=float)
    p1 = np.array([r[2] for r in rows], dtype=float)
    rad = np.array([r[3] for r in rows], dtype=float)
    c = np.array([r[4] for r in rows], dtype=float)
    R = np.array([r[5] for r in rows], dtype=float)
    h = np.array([r[6] for r in rows], dtype=float)
    return _finish(kind, p0, p1, rad, c, R, h)


def _finish(kind, p0, p1, r, c, R, h) -> _Prims:
    seg = kind == _SEG
    bc = np.where(seg[..., None], 0.5 * (p0 + p1), c)
    br = np.where(seg, 0.5 * np.linalg.norm(p1 - p0, axis=-1) + r, np.linalg.norm(h, axis=-1))
    return _Prims(kind, p0, p1, r, c, R, h, bc, br)


# --------------------------------------------------------------------------
# distance kernels (vectorized over leading axes)


def _dot(u, v):
    return np.einsum("...i,...i->...", u, v)


def segment_segment_distance(p1, q1, p2, q2) -> np.ndarray:
    """Distance between segments [p1, q1] and [p2, q2]; degenerate segments allowed."""
    p1, q1, p2, q2 = (np.asarray(x, dtype=float) for x in (p1, q1, p2, q2))
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    eps = 1e-18
    a_small = a <= eps
    e_small = e <= eps
    safe_a = np.where(a_small, 1.0, a)
    safe_e = np.where(e_small, 1.0, e)
    denom = a * e - b * b
    general = denom > 1e-12 * a * e
    safe_den = np.where(general, denom, 1.0)
    s = np.where(general, np.clip((b * f - c * e) / safe_den, 0.0, 1.0), 0.0)
    t = (b * s + f) / safe_e
    s = np.where(t < 0.0, np.clip(-c / safe_a, 0.0, 1.0), np.where(t > 1.0, np.clip((b - c) / safe_a, 0.0, 1.0), s))
    t = np.clip(t, 0.0, 1.0)
    s = np.where(e_small, np.clip(-c / safe_a, 0.0, 1.0), s)
    t = np.where(e_small, 0.0, t)
    s = np.where(a_small, 0.0, s)
    t = np.where(a_small, np.where(e_small, 0.0, np.clip(f / safe_e, 0.0, 1.0)), t)
    diff = (p1 + d1 * s[..., None]) - (p2 + d2 * t[..., None])
    return np.sqrt(_dot(diff, diff))


def _point_box_local(p, h) -> np.ndarray:
    """Signed distance from points to centered axis-aligned boxes."""
    q = np.abs(p) - h
    outside = np.sqrt(_dot(np.maximum(q, 0.0), np.maximum(q, 0.0)))
    inside = np.minimum(q.max(axis=-1), 0.0)
    return outside + inside


def _to_local(p, c, R):
    return np.einsum("...i,...ij->...j", p - c, R)


def _segment_hits_box_local(a, b, h) -> np.ndarray:
    d = b - a
    tiny = np.abs(d) < 1e-15
    safe_d = np.where(tiny, 1.0, d)
    t1 = (-h - a) / safe_d
    t2 = (h - a) / safe_d
    inside_slab = np.abs(a) <= h
    lo = np.where(tiny, np.where(inside_slab, -np.inf, np.inf), np.minimum(t1, t2))
    hi = np.where(tiny, np.where(inside_slab, np.inf, -np.inf), np.maximum(t1, t2))
    tmin = np.maximum(lo.max(axis=-1), 0.0)
    tmax = np.minimum(hi.min(axis=-1), 1.0)
    return tmin <= tmax


_CORNERS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)


def _edge_templates():
    e0, e1 = [], []
    for axis in range(3):
        others = [i for i in range(3) if i != axis]
        for s1 in (-1.0, 1.0):
            for s2 in (-1.0, 1.0):
                a = np.zeros(3)
                a[others[0]], a[others[1]] = s1, s2
                b = a.copy()
                a[axis], b[axis] = -1.0, 1.0
                e0.append(a)
                e1.append(b)
    return np.array(e0), np.array(e1)


_EDGE0, _EDGE1 = _edge_templates()


def _segment_box_core(p0, p1, c, R, h) -> np.ndarray:
    a = _to_local(p0, c, R)
    b = _to_local(p1, c, R)
    sd = np.minimum(_point_box_local(a, h), _point_box_local(b, h))
    hit = _segment_hits_box_local(a, b, h)
    E0 = _EDGE0 * h[..., None, :]
    E1 = _EDGE1 * h[..., None, :]
    edge = segment_segment_distance(a[..., None, :], b[..., None, :], E0, E1).min(axis=-1)
    return np.where(hit, np.minimum(sd, 0.0), np.minimum(sd, edge))


def _segment_box_axis_gap(p0, p1, c, R, h) -> np.ndarray:
    """Lower bound on segment/box distance from the box's own face normals."""
    a = _to_local(p0, c, R)
    b = _to_local(p1, c, R)
    gap = np.maximum(np.minimum(a, b) - h, -h - np.maximum(a, b))
    return np.maximum(gap, 0.0).max(axis=-1)


def _box_box_core(ca, Ra, ha, cb, Rb, hb, exact: bool = True) -> np.ndarray:
    M = ca.shape[0]
    axes_a = np.swapaxes(Ra, -1, -2)  # rows are axes
    axes_b = np.swapaxes(Rb, -1, -2)
    cross = np.cross(axes_a[:, :, None, :], axes_b[:, None, :, :]).reshape(M, 9, 3)
    cn = np.linalg.norm(cross, axis=-1)
    valid_cross = cn > 1e-9
    cross = cross / np.where(valid_cross, cn, 1.0)[..., None]
    L = np.concatenate([axes_a, axes_b, cross], axis=1)  # (M, 15, 3)
    valid = np.concatenate([np.ones((M, 6), dtype=bool), valid_cross], axis=1)
    ra = (np.abs(np.einsum("mki,mji->mkj", L, axes_a)) * ha[:, None, :]).sum(-1)
    rb = (np.abs(np.einsum("mki,mji->mkj", L, axes_b)) * hb[:, None, :]).sum(-1)
    sep = np.abs(np.einsum("mki,mi->mk", L, cb - ca)) - ra - rb
    sep = np.where(valid, sep, -np.inf)
    max_sep = sep.max(axis=-1)
    out = max_sep.copy()
    apart = np.flatnonzero(max_sep > 0)
    # a positive separating-axis gap already bounds the distance from below
    if apart.size and exact:
        out[apart] = _box_box_separated(ca[apart], Ra[apart], ha[apart], cb[apart], Rb[apart], hb[apart])
    return out


def _box_box_separated(ca, Ra, ha, cb, Rb, hb) -> np.ndarray:
    va = ca[:, None, :] + np.einsum("mij,mkj->mki", Ra, _CORNERS[None] * ha[:, None, :])
    vb = cb[:, None, :] + np.einsum("mij,mkj->mki", Rb, _CORNERS[None] * hb[:, None, :])
    d_va = _point_box_local(_to_local(va, cb[:, None, :], Rb[:, None]), hb[:, None, :]).min(-1)
    d_vb = _point_box_local(_to_local(vb, ca[:, None, :], Ra[:, None]), ha[:, None, :]).min(-1)
    ea0 = ca[:, None, :] + np.einsum("mij,mkj->mki", Ra, _EDGE0[None] * ha[:, None, :])
    ea1 = ca[:, None, :] + np.einsum("mij,mkj->mki", Ra, _EDGE1[None] * ha[:, None, :])
    eb0 = cb[:, None, :] + np.einsum("mij,mkj->mki", Rb, _EDGE0[None] * hb[:, None, :])
    eb1 = cb[:, None, :] + np.einsum("mij,mkj->mki", Rb, _EDGE1[None] * hb[:, None, :])
    d_ee = segment_segment_distance(ea0[:, :, None], ea1[:, :, None], eb0[:, None], eb1[:, None]).reshape(len(ca), -1)
    return np.minimum(np.minimum(d_va, d_vb), d_ee.min(-1))


def _segment_box_pairs(p0, p1, r, c, R, h, exact: bool) -> np.ndarray:
    if exact:
        return _segment_box_core(p0, p1, c, R, h)
    out = _segment_box_axis_gap(p0, p1, c, R, h)
    near = np.flatnonzero(out <= r)
    if near.size:
        out[near] = _segment_box_core(p0[near], p1[near], c[near], R[near], h[near])
    return out


def _pair_distances(A: _Prims, B: _Prims, exact: bool = True) -> np.ndarray:
    """Signed distance for aligned pair arrays.

    With ``exact=False`` only the sign is guaranteed; separated pairs may
    report a positive lower bound instead of the true distance.
    """
    M = A.kind.shape[0]
    core = np.empty(M)
    ka, kb = A.kind, B.kind
    ss = np.flatnonzero((ka == _SEG) & (kb == _SEG))
    if ss.size:
        core[ss] = segment_segment_distance(A.p0[ss], A.p1[ss], B.p0[ss], B.p1[ss])
    sb = np.flatnonzero((ka == _SEG) & (kb == _BOX))
    if sb.size:
        core[sb] = _segment_box_pairs(A.p0[sb], A.p1[sb], A.r[sb] + B.r[sb], B.c[sb], B.R[sb], B.h[sb], exact)
    bs = np.flatnonzero((ka == _BOX) & (kb == _SEG))
    if bs.size:
        core[bs] = _segment_box_pairs(B.p0[bs], B.p1[bs], A.r[bs] + B.r[bs], A.c[bs], A.R[bs], A.h[bs], exact)
    bb = np.flatnonzero((ka == _BOX) & (kb == _BOX))
    if bb.size:
        core[bb] = _box_box_core(A.c[bb], A.R[bb], A.h[bb], B.c[bb], B.R[bb], B.h[bb], exact)
    return core - A.r - B.r


def _shape_key(shape: Shape, pose: RigidTransform):
    if isinstance(shape, Sphere):
        rank, params = 0, (shape.radius,)
    elif isinstance(shape, Capsule):
        rank, params = 1, shape.p0 + shape.p1 + (shape.radius,)
    else:
        rank, params = 2, shape.half_extents
    return (rank, params, tuple(pose.translation), tuple(pose.rotation.ravel()))


def shape_distance(a: Shape, pose_a: RigidTransform, b: Shape, pose_b: RigidTransform) -> float:
    """Signed clearance between two posed shapes (negative when overlapping)."""
    if _shape_key(b, pose_b) < _shape_key(a, pose_a):
        a, pose_a, b, pose_b = b, pose_b, a, pose_a
    P = _pack([(a, pose_a), (b, pose_b)])
    return float(_pair_distances(P.take([0]), P.take([1]))[0])


def boxes_overlap(h_a, pose_a: RigidTransform, h_b, pose_b: RigidTransform) -> bool:
    """Separating-axis overlap test for two boxes (touching counts as overlap)."""
    d = _box_box_core(
        pose_a.translation[None], pose_a.rotation[None], np.asarray(h_a, dtype=float)[None],
        pose_b.translation[None], pose_b.rotation[None], np.asarray(h_b, dtype=float)[None],
    )
    return bool(d[0] <= 0.0)


# --------------------------------------------------------------------------
# robot collision model


@dataclass(frozen=True)
class LinkShape:
    link: int
    shape: Shape
    offset: RigidTransform
    name: str = ""


def _shape_from_spec(spec: dict) -> Shape:
    kind = spec["type"]
    if kind == "sphere":
        return Sphere(float(spec["radius"]))
    if kind == "capsule":
        return Capsule(tuple(spec["p0"]), tuple(spec["p1"]), float(spec["radius"]))
    if kind == "box":
        return Box(tuple(spec["half_extents"]))
    raise ValueError(f"unknown shape type {kind!r}")


def _shape_to_spec(shape: Shape) -> dict:
    if isinstance(shape, Sphere):
        return {"type": "sphere", "radius": shape.radius}
    if isinstance(shape, Capsule):
        return {"type": "capsule", "p0": list(shape.p0), "p1": list(shape.p1), "radius": shape.radius}
    return {"type": "box", "half_extents": list(shape.half_extents)}


class RobotCollisionModel:
    """Link-attached collision shapes plus the set of pairs exempt from self-checks.

    Link indices follow the kinematics frame numbering: 0 is the mount,
    ``1..n`` the moving links, ``n+1`` the end-effector (prop).
    """

    def __init__(self, model: RobotModel, shapes, allowed_pairs=None):
        self.n_frames = model.dof + 2
        self.shapes = tuple(shapes)
        for s in self.shapes:
            if not 0 <= s.link < self.n_frames:
                raise ValueError(f"shape {s.name!r} references unknown link {s.link}")
        if allowed_pairs is None:
            allowed_pairs = default_allowed_pairs(model.dof)
        self.allowed_pairs = frozenset(tuple(sorted(p)) for p in allowed_pairs)
        local = _pack([(s.shape, s.offset) for s in self.shapes])
        self._local = local
        self._links = np.array([s.link for s in self.shapes], dtype=int)
        pairs = []
        for i in range(len(self.shapes)):
            for j in range(i + 1, len(self.shapes)):
                li, lj = self.shapes[i].link, self.shapes[j].link
                if li == lj or tuple(sorted((li, lj))) in self.allowed_pairs:
                    continue
                pairs.append((i, j))
        self.self_pairs = np.array(pairs, dtype=int).reshape(-1, 2)
        # required clearance per shape against the scene and per self pair
        self.scene_margin = np.zeros(len(self.shapes))
        self.self_margin = np.zeros(len(self.self_pairs))

    def with_margins(self, scene_margin, self_margin) -> RobotCollisionModel:
        """Copy that reports clearances reduced by the given margins."""
        out = copy.copy(self)
        out.scene_margin = np.broadcast_to(np.asarray(scene_margin, dtype=float), self.scene_margin.shape).copy()
        out.self_margin = np.broadcast_to(np.asarray(self_margin, dtype=float), self.self_margin.shape).copy()
        return out

    @classmethod
    def from_robot(cls, model: RobotModel) -> RobotCollisionModel:
        shapes = []
        for spec in model.link_geometry:
            shape = _shape_from_spec(spec)
            offset = RigidTransform.from_xyz_rpy(spec.get("xyz", (0, 0, 0)), spec.get("rpy", (0, 0, 0)))
            shapes.append(LinkShape(int(spec["link"]), shape, offset, spec.get("name", "")))
        return cls(model, shapes, model.allowed_pairs)

    def world_prims(self, frames: np.ndarray) -> _Prims:
        """World-frame primitives for a batch of frame stacks (K, n+2, 4, 4)."""
        T = frames[:, self._links]  # (K, Ns, 4, 4)
        Rl, tl = T[..., :3, :3], T[..., :3, 3]
        L = self._local

        def move(p):
            return np.einsum("knij,nj->kni", Rl, p) + tl

        p0, p1, c = move(L.p0), move(L.p1), move(L.c)
        R = np.einsum("knij,njl->knil", Rl, L.R)
        K = frames.shape[0]
        shape = (K, len(self.shapes))
        return _Prims(
            np.broadcast_to(L.kind, shape), p0, p1, np.broadcast_to(L.r, shape), c, R,
            np.broadcast_to(L.h, shape + (3,)), np.where((L.kind == _SEG)[None, :, None], 0.5 * (p0 + p1), c),
            np.broadcast_to(L.br, shape),
        )

    def bodies(self, model: RobotModel, q) -> list[tuple[str, Shape, RigidTransform]]:
        """World-posed robot shapes for one configuration."""
        F = frames_batch(model, model.check_config(q)[None])[0]
        out = []
        for s in self.shapes:
            pose = RigidTransform.from_matrix(F[s.link]) @ s.offset
            out.append((s.name or f"link{s.link}", s.shape, pose))
        return out


def _extent(shape: Shape, offset: RigidTransform) -> float:
    """Largest distance from the link frame origin to a point of the shape."""
    if isinstance(shape, Sphere):
        return float(np.linalg.norm(offset.translation)) + shape.radius
    if isinstance(shape, Capsule):
        ends = (offset.apply(np.array(shape.p0)), offset.apply(np.array(shape.p1)))
        return max(float(np.linalg.norm(e)) for e in ends) + shape.radius
    return float(np.linalg.norm(offset.translation) + np.linalg.norm(shape.half_extents))


def sweep_radii(model: RobotModel, cmodel: RobotCollisionModel) -> np.ndarray:
    """(n_shapes, dof): bound on the distance from joint k's axis to any point of each shape.

    Triangle inequality along the chain (DH offsets, tool offset, shape
    extent); zero for joints that do not move the shape.
    """
    n = model.dof
    step = [0.0] + [float(np.hypot(j.a, j.d)) for j in model.joints]
    step.append(float(np.linalg.norm(model.tool_transform.translation)))
    rho = np.zeros((len(cmodel.shapes), n))
    for i, s in enumerate(cmodel.shapes):
        ext = _extent(s.shape, s.offset)
        for k in range(1, min(s.link, n) + 1):
            rho[i, k - 1] = sum(step[k:s.link + 1]) + ext
    return rho


def sweep_margins(model: RobotModel, cmodel: RobotCollisionModel, resolution: float):
    """Clearance margins that make sampled segment checks sound at this resolution.

    Every configuration on a sampled segment is within resolution / 2 of a
    sample in each joint. A shape then moves at most that times the sum of its
    sweep radii; a self pair only through the joints between its two links.
    """
    rho = sweep_radii(model, cmodel)
    half = 0.5 * resolution
    scene = half * rho.sum(axis=1)
    links = np.array([s.link for s in cmodel.shapes], dtype=int)
    pair = np.zeros(len(cmodel.self_pairs))
    for p, (a, b) in enumerate(cmodel.self_pairs):
        lo, hi = (a, b) if links[a] <= links[b] else (b, a)
        pair[p] = half * rho[hi, links[lo]:].sum()
    return scene, pair


def default_allowed_pairs(dof: int) -> frozenset:
    """Adjacent links and everything against the mount (link 0)."""
    n_frames = dof + 2
    pairs = {(i, i + 1) for i in range(n_frames - 1)}
    pairs |= {(0, j) for j in range(1, n_frames)}
    return frozenset(pairs)


# --------------------------------------------------------------------------
# configuration queries


def _gather(P: _Prims, k, i) -> _Prims:
    return _Prims(*(getattr(P, f)[k, i] for f in _PRIM_FIELDS))


def _clearances(model, cmodel: RobotCollisionModel, Q, scene: SceneSnapshot, exact: bool,
                include_self: bool = True) -> np.ndarray:
    """Per-configuration minimum signed clearance.

    With ``exact=False`` only the sign is reliable: positive values may be
    lower bounds.
    """
    Q = np.atleast_2d(Q)
    K = Q.shape[0]
    out = np.full(K, np.inf)
    if not cmodel.shapes:
        return out
    W = cmodel.world_prims(frames_batch(model, Q))
    groups = []
    if scene is not None and scene._packed is not None:
        S = scene._packed
        Ns = S.kind.shape[0]
        # without self pairs only the moving links matter; the mount never moves
        rob = np.arange(len(cmodel.shapes)) if include_self else np.flatnonzero(cmodel._links > 0)
        ia = np.repeat(rob, Ns)
        ib = np.tile(np.arange(Ns), len(rob))
        m = cmodel.scene_margin[ia]
        lb = np.linalg.norm(W.bc[:, ia] - S.bc[ib], axis=-1) - W.br[:, ia] - S.br[ib] - m
        groups.append((ia, ib, S, lb, m))
    if include_self and len(cmodel.self_pairs):
        i, j = cmodel.self_pairs[:, 0], cmodel.self_pairs[:, 1]
        m = cmodel.self_margin
        lb = np.linalg.norm(W.bc[:, i] - W.bc[:, j], axis=-1) - W.br[:, i] - W.br[:, j] - m
        groups.append((i, j, None, lb, m))
    if not groups:
        return out
    if exact:
        # the nearest bounding-sphere centers give an upper bound per configuration
        ub = np.min([(lb + W.br[:, ia] + (S_.br[ib] if S_ is not None else W.br[:, ib])).min(axis=1)
                     for ia, ib, S_, lb, _ in groups], axis=0)
    for ia, ib, S_, lb, m in groups:
        limit = ub[:, None] if exact else 0.0
        k, p = np.nonzero(lb <= limit)
        if not k.size:
            np.minimum(out, lb.min(axis=1), out=out)
            continue
        A = _gather(W, k, ia[p])
        if S_ is None:
            B = _gather(W, k, ib[p])
        else:
            B = S_.take(ib[p])
        d = lb.copy()
        raw = _pair_distances(A, B, exact)
        if not exact and m.any():
            # a loose positive bound may hide a clearance above the margin
            redo = np.flatnonzero((raw > 0) & (raw <= m[p]))
            if redo.size:
                raw[redo] = _pair_distances(A.take(redo), B.take(redo), True)
        d[k, p] = raw - m[p]
        np.minimum(out, d.min(axis=1), out=out)
    return out


def min_clearance(model: RobotModel, cmodel: RobotCollisionModel, q, scene: SceneSnapshot) -> float:
    """Smallest signed distance over robot/scene and non-exempt self pairs (+inf if none)."""
    q = model.check_config(q)
    return float(_clearances(model, cmodel, q[None], scene, exact=True)[0])


def scene_clearance(model: RobotModel, cmodel: RobotCollisionModel, q, scene: SceneSnapshot) -> float:
    """Smallest signed distance between the moving links and the scene bodies."""
    q = model.check_config(q)
    return float(_clearances(model, cmodel, q[None], scene, exact=True, include_self=False)[0])


def config_collides(model: RobotModel, cmodel: RobotCollisionModel, q, scene: SceneSnapshot) -> bool:
    q = model.check_config(q)
    return bool(_clearances(model, cmodel, q[None], scene, exact=False)[0] <= 0.0)


def configs_collide(model: RobotModel, cmodel: RobotCollisionModel, Q, scene: SceneSnapshot) -> np.ndarray:
    """Vectorized ``config_collides`` over the rows of ``Q``."""
    return _clearances(model, cmodel, Q, scene, exact=False) <= 0.0


def interpolate_segment(q_a, q_b, resolution: float) -> np.ndarray:
    """Straight joint-space samples spaced <= resolution in max-norm, endpoints included."""
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    span = float(np.abs(q_b - q_a).max()) if q_a.size else 0.0
    n = max(1, math.ceil(span / resolution))
    s = np.arange(n + 1) / n
    Q = q_a[None, :] + s[:, None] * (q_b - q_a)[None, :]
    Q[-1] = q_b
    return Q


_CHUNK = 96


def _segment_free(model, cmodel, q_a, q_b, scene, resolution) -> bool:
    if tuple(q_b) < tuple(q_a):
        q_a, q_b = q_b, q_a
    Q = interpolate_segment(q_a, q_b, resolution)
    n = len(Q)
    # coarse stride first so that blocked segments fail fast
    order = np.concatenate([np.arange(0, n, 8), np.setdiff1d(np.arange(n), np.arange(0, n, 8))])
    for start in range(0, n, _CHUNK):
        idx = order[start:start + _CHUNK]
        if configs_collide(model, cmodel, Q[idx], scene).any():
            return False
    return True


def motion_valid(model, cmodel, q_a, q_b, scene: SceneSnapshot, resolution: float = DEFAULT_RESOLUTION) -> bool:
    """True iff every interpolated configuration on the joint-space segment is collision-free."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    q_a = model.check_config(q_a)
    q_b = model.check_config(q_b)
    return _segment_free(model, cmodel, q_a, q_b, scene, resolution)


def first_invalid_via_point(model, cmodel, path, start_index: int, scene: SceneSnapshot,
                            resolution: float = DEFAULT_RESOLUTION) -> int | None:
    """Smallest index >= start_index whose configuration or incoming segment is invalid."""
    path = [model.check_config(q) for q in path]
    if not 0 <= start_index < len(path):
        raise IndexError("start_index outside the path")
    if config_collides(model, cmodel, path[start_index], scene):
        return start_index
    for i in range(start_index + 1, len(path)):
        if not _segment_free(model, cmodel, path[i - 1], path[i], scene, resolution):
            return i
    return None


class CollisionChecker:
    """Validity queries bound to one robot, one snapshot and one resolution."""

    def __init__(self, model: RobotModel, cmodel: RobotCollisionModel, scene: SceneSnapshot,
                 resolution: float = DEFAULT_RESOLUTION):
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        self.model = model
        self.cmodel = cmodel
        self.scene = scene
        self.resolution = resolution

    def is_valid(self, q) -> bool:
        return not config_collides(self.model, self.cmodel, q, self.scene)

    def motion_valid(self, q_a, q_b) -> bool:
        return motion_valid(self.model, self.cmodel, q_a, q_b, self.scene, self.resolution)

    def clearance(self, q) -> float:
        return min_clearance(self.model, self.cmodel, q, self.scene)

    def scene_clearance(self, q) -> float:
        return scene_clearance(self.model, self.cmodel, q, self.scene)

    def first_invalid(self, path, start_index: int = 0) -> int | None:
        return first_invalid_via_point(self.model, self.cmodel, path, start_index, self.scene, self.resolution)


# --------------------------------------------------------------------------
# scene files


def body_from_dict(d: dict) -> CollisionBody:
    pose = d.get("pose", {})
    return CollisionBody(
        id=str(d["id"]),
        shape=_shape_from_spec(d["shape"]),
        pose=RigidTransform.from_xyz_rpy(pose.get("xyz", (0, 0, 0)), pose.get("rpy", (0, 0, 0))),
        tag=Tag(d.get("tag", Tag.ENVIRONMENT.value)),
    )


def body_to_dict(b: CollisionBody) -> dict:
    return {
        "id": b.id,
        "tag": b.tag.value,
        "shape": _shape_to_spec(b.shape),
        "pose": {"xyz": [float(v) for v in b.pose.translation], "rpy": [float(v) for v in b.pose.rpy()]},
    }


def load_bodies(path) -> list[CollisionBody]:
    data = json.loads(Path(path).read_text())
    return [body_from_dict(d) for d in data["bodies"]]


def save_bodies(path, bodies) -> None:
    Path(path).write_text(json.dumps({"bodies": [body_to_dict(b) for b in bodies]}, indent=2) + "\n")
