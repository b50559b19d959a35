"""Seeded synthetic FoV datasets.

Each video has one camera position, one visible distance ``r`` and one
visible angle. Cameras are scattered around weighted hotspots and aimed at
them with Gaussian azimuth noise; a fraction of background videos is placed
uniformly in the area with random azimuths. ``r`` follows a Gamma
distribution in kilometers, truncated by resampling below ``r_cap``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import M_PER_DEG_LAT, GeoPoint, Mbr
from .store import CSV_FIELDS

STANDARD_MIXES = {
    "100pct60": ((60.0, 1.0),),
    "30pct160": ((160.0, 0.3), (360.0, 0.7)),
    "70pct160": ((160.0, 0.7), (360.0, 0.3)),
}


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetProfile:
    area: Mbr
    n_videos: int = 1000
    frames_per_video: tuple[int, int] = (10, 10)
    hotspots: tuple[tuple[GeoPoint, float], ...] = ()
    alpha_mix: tuple[tuple[float, float], ...] = ((60.0, 1.0),)
    gamma_shape: float = 1.6
    gamma_scale: float = 0.4    # km
    r_cap: float = 2.0          # km
    aim_noise_sigma: float = 10.0   # degrees
    placement_sigma: float = 150.0  # meters
    background_fraction: float = 0.1
    t_start: int = 1_400_000_000
    t_span: int = 86_400 * 365
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "frames_per_video", tuple(self.frames_per_video))
        object.__setattr__(self, "hotspots", tuple((h, float(w)) for h, w in self.hotspots))
        object.__setattr__(self, "alpha_mix",
                           tuple((float(a), float(f)) for a, f in self.alpha_mix))
        self.validate()

    def validate(self) -> None:
        if self.n_videos < 0:
            raise ProfileError(f"n_videos must be >= 0, got {self.n_videos}")
        lo, hi = self.frames_per_video
        if not 1 <= lo <= hi:
            raise ProfileError(f"bad frames_per_video range {self.frames_per_video}")
        for h, w in self.hotspots:
            if not self.area.contains(h):
                raise ProfileError(f"hotspot {h} outside area")
            if not w > 0:
                raise ProfileError(f"hotspot weight must be > 0, got {w}")
        if not self.alpha_mix:
            raise ProfileError("alpha_mix is empty")
        for a, f in self.alpha_mix:
            if not 0.0 < a <= 360.0:
                raise ProfileError(f"alpha {a} outside (0, 360]")
            if not 0.0 <= f <= 1.0:
                raise ProfileError(f"alpha fraction {f} outside [0, 1]")
        if abs(sum(f for _, f in self.alpha_mix) - 1.0) > 1e-9:
            raise ProfileError("alpha_mix fractions must sum to 1")
        for name in ("gamma_shape", "gamma_scale", "r_cap", "placement_sigma"):
            if not getattr(self, name) > 0:
                raise ProfileError(f"{name} must be > 0")
        if not self.aim_noise_sigma >= 0:
            raise ProfileError("aim_noise_sigma must be >= 0")
        if not 0.0 <= self.background_fraction <= 1.0:
            raise ProfileError("background_fraction outside [0, 1]")
        if not self.hotspots and self.background_fraction < 1.0 and self.n_videos:
            raise ProfileError("no hotspots: set background_fraction=1 or add hotspots")
        if self.t_span < 1:
            raise ProfileError("t_span must be >= 1")


def profile_from_table1(variant: str, base: DatasetProfile) -> DatasetProfile:
    try:
        mix = STANDARD_MIXES[variant]
    except KeyError:
        raise ProfileError(f"unknown variant {variant!r}; expected one of "
                           f"{sorted(STANDARD_MIXES)}") from None
    return replace(base, alpha_mix=mix)


@dataclass
class Video:
    video_id: str
    lat: float
    lon: float
    r: float        # meters
    alpha: float
    t0: int
    thetas: np.ndarray = field(repr=False)


def _draw_r(rng, profile: DatasetProfile) -> float:
    while True:
        r = float(rng.gamma(profile.gamma_shape, profile.gamma_scale))
        if r < profile.r_cap:
            return r * 1000.0


def _wrap(theta: float) -> float:
    w = theta % 360.0
    return 0.0 if w >= 360.0 else w


def generate_videos(profile: DatasetProfile) -> list[Video]:
    """Draw all videos of ``profile``; deterministic given ``profile.seed``."""
    rng = np.random.default_rng(profile.seed)
    a = profile.area
    weights = np.array([w for _, w in profile.hotspots], dtype=float)
    if weights.size:
        weights /= weights.sum()
    alphas = np.array([al for al, _ in profile.alpha_mix])
    alpha_p = np.array([f for _, f in profile.alpha_mix])
    alpha_p /= alpha_p.sum()
    lo, hi = profile.frames_per_video
    videos = []
    for v in range(profile.n_videos):
        background = not profile.hotspots or rng.random() < profile.background_fraction
        if background:
            lat = rng.uniform(a.lat_min, a.lat_max)
            lon = rng.uniform(a.lon_min, a.lon_max)
            target = None
        else:
            target = profile.hotspots[rng.choice(len(weights), p=weights)][0]
            kx = M_PER_DEG_LAT * math.cos(math.radians(target.lat))
            while True:
                dx, dy = rng.normal(0.0, profile.placement_sigma, size=2)
                lat = target.lat + dy / M_PER_DEG_LAT
                lon = target.lon + dx / kx
                if a.lat_min <= lat <= a.lat_max and a.lon_min <= lon <= a.lon_max:
                    break
        r = _draw_r(rng, profile)
        alpha = float(alphas[rng.choice(alphas.size, p=alpha_p)])
        n_frames = int(rng.integers(lo, hi + 1))
        t0 = profile.t_start + int(rng.integers(0, profile.t_span))
        if target is None:
            thetas = rng.uniform(0.0, 360.0, size=n_frames)
        else:
            kx = M_PER_DEG_LAT * math.cos(math.radians(0.5 * (lat + target.lat)))
            aim = math.degrees(math.atan2((target.lon - lon) * kx,
                                          (target.lat - lat) * M_PER_DEG_LAT))
            thetas = aim + rng.normal(0.0, profile.aim_noise_sigma, size=n_frames)
        thetas = np.array([_wrap(t) for t in thetas])
        videos.append(Video(f"v{v:06d}", float(lat), float(lon), float(r), alpha, t0, thetas))
    return videos


def write_videos(videos, path) -> int:
    """Write one CSV row per frame; returns the row count."""
    rows = 0
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_FIELDS) + "\n")
        for v in videos:
            head = f"{v.video_id},"
            tail = f",{v.lat!r},{v.lon!r}"
            for j, th in enumerate(v.thetas.tolist()):
                fh.write(f"{head}{v.t0 + j}{tail},{th!r},{v.r!r},{v.alpha!r}\n")
                rows += 1
    return rows


def generate(profile: DatasetProfile, path) -> int:
    """Generate the dataset described by ``profile`` into ``path``."""
    return write_videos(generate_videos(profile), path)


def _floats(text: str, n: int | None = None) -> list[float]:
    vals = [float(x) for x in text.split(",")]
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def parse_profile(text: str) -> DatasetProfile:
    """Parse a ``key=value`` profile; see the README for the keys."""
    kw: dict = {"hotspots": []}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ProfileError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "area":
                lat0, lon0, lat1, lon1 = _floats(value, 4)
                kw["area"] = Mbr(lat0, lat1, lon0, lon1)
            elif key == "hotspot":
                lat, lon, w = _floats(value, 3)
                kw["hotspots"].append((GeoPoint(lat, lon), w))
            elif key == "frames_per_video":
                parts = [int(x) for x in value.split(",")]
                kw[key] = (parts[0], parts[-1])
            elif key == "alpha_mix":
                mix = []
                for item in value.split(","):
                    al, fr = item.split(":")
                    mix.append((float(al), float(fr)))
                kw[key] = tuple(mix)
            elif key in ("n_videos", "seed", "t_start", "t_span"):
                kw[key] = int(value)
            elif key in ("gamma_shape", "gamma_scale", "r_cap", "aim_noise_sigma",
                         "placement_sigma", "background_fraction"):
                kw[key] = float(value)
            else:
                raise ProfileError(f"line {lineno}: unknown key {key!r}")
        except ProfileError:
            raise
        except ValueError as exc:
            raise ProfileError(f"line {lineno}: bad value for {key}: {exc}") from None
    if "area" not in kw:
        raise ProfileError("profile needs an 'area' line")
    return DatasetProfile(**kw)


def load_profile(path) -> DatasetProfile:
    return parse_profile(Path(path).read_text(encoding="utf-8"))
