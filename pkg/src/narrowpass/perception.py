"""Simulated sensing: range-limited noisy detections and particle-filter tracks.

Ground truth plus Gaussian noise stands in for the full point-cloud pipeline.
Tracks use a constant-velocity particle filter with nearest-neighbor
association, coast through occlusions, and expose a windowed closing-speed
estimate for the planner's crossing prediction.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import CorridorWorld
from .kinematics import RobotState
from .pedestrian import PedestrianState


@dataclass(frozen=True)
class Detection:
    position: np.ndarray
    tick: int


@dataclass(frozen=True)
class TrackedPerson:
    id: int
    position_estimate: np.ndarray
    velocity_estimate: np.ndarray
    position_spread: float
    last_seen_tick: int

    @property
    def position(self) -> np.ndarray:
        return self.position_estimate


@dataclass(frozen=True)
class TrackerConfig:
    particle_count: int = 800
    process_noise_pos: float = 0.05   # m / sqrt(s)
    process_noise_vel: float = 0.30   # m/s / sqrt(s)
    measurement_noise: float = 0.05   # m
    sensor_range: float = 20.0        # m
    update_rate: float = 10.0         # Hz
    drop_timeout: float = 1.0         # s
    closing_window: float = 0.5       # s of distance history for v_r fits
    velocity_prior: float = 1.0       # m/s spread for new tracks

    def __post_init__(self) -> None:
        if self.particle_count < 100:
            raise ValueError("particle_count must be at least 100")
        if self.sensor_range <= 0 or self.update_rate <= 0 or self.drop_timeout <= 0:
            raise ValueError("invalid tracker configuration")


def sense(world: CorridorWorld, robot: RobotState,
          pedestrians: Sequence[PedestrianState], rng_seed: int, tick: int,
          config: TrackerConfig) -> list[Detection]:
    """Detections for every visible pedestrian within sensor range.

    Occlusion is a wall segment blocking the robot->pedestrian line of sight.
    Noise draws depend only on (seed, tick, pedestrian order), so repeated
    calls are identical.
    """
    rng = np.random.default_rng((rng_seed, tick))
    out: list[Detection] = []
    for ped in pedestrians:
        noise = rng.normal(0.0, 1.0, size=2)
        d = float(np.linalg.norm(ped.position - robot.position))
        if d > config.sensor_range:
            continue
        if not world.line_of_sight(robot.position, ped.position):
            continue
        pos = ped.position + config.measurement_noise * noise
        out.append(Detection(position=pos, tick=tick))
    return out


def relative_closing_speed(samples: Sequence[tuple[float, float]],
                           window: float = 0.5) -> Optional[float]:
    """Closing speed (positive = approaching) from (time, distance) samples.

    Fits a line to the samples inside the trailing window; returns None when
    fewer than two samples are available (not yet estimable).
    """
    if len(samples) < 2:
        return None
    t_end = samples[-1][0]
    pts = [(t, d) for t, d in samples if t >= t_end - window - 1e-9]
    if len(pts) < 2:
        return None
    t = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    slope = np.polyfit(t - t[0], d, 1)[0]
    return float(-slope)


class _Track:
    __slots__ = ("id", "particles", "weights", "last_seen_tick", "distance_history")

    def __init__(self, track_id: int, particles: np.ndarray, tick: int,
                 history_len: int):
        self.id = track_id
        self.particles = particles          # (N, 4): x, y, vx, vy
        self.weights = np.full(len(particles), 1.0 / len(particles))
        self.last_seen_tick = tick
        self.distance_history: deque[tuple[float, float]] = deque(maxlen=history_len)

    def mean(self) -> np.ndarray:
        return self.weights @ self.particles

    def spread(self) -> float:
        m = self.mean()[:2]
        var = self.weights @ np.sum((self.particles[:, :2] - m) ** 2, axis=1)
        return float(math.sqrt(max(var / 2.0, 0.0)))


class PeopleTracker:
    """Multi-person tracker: one particle set per track, single owner per run."""

    def __init__(self, config: TrackerConfig, seed: int = 0):
        self.config = config
        self.rng = np.random.default_rng((seed, 0x7261636B))
        self.tracks: list[_Track] = []
        self._next_id = 0
        self._tick = 0

    def _likelihood_sigma(self) -> float:
        return max(self.config.measurement_noise, 0.02)

    def _gate(self, track: _Track) -> float:
        return 3.0 * self._likelihood_sigma() + track.spread()

    def _predict(self, track: _Track, dt: float) -> None:
        n = len(track.particles)
        sq = math.sqrt(dt)
        track.particles[:, 0:2] += track.particles[:, 2:4] * dt
        track.particles[:, 0:2] += self.rng.normal(
            0.0, self.config.process_noise_pos * sq, size=(n, 2))
        track.particles[:, 2:4] += self.rng.normal(
            0.0, self.config.process_noise_vel * sq, size=(n, 2))

    def _reweight_and_resample(self, track: _Track, z: np.ndarray) -> None:
        sigma = self._likelihood_sigma()
        err = track.particles[:, 0:2] - z
        sq = np.sum(err * err, axis=1)
        logw = -0.5 * sq / (sigma * sigma)
        logw -= logw.max()
        w = np.exp(logw)
        total = w.sum()
        if total <= 0 or not np.isfinite(total):
            w = np.full(len(w), 1.0 / len(w))
        else:
            w = w / total
        track.weights = w
        # systematic resampling
        n = len(w)
        positions = (self.rng.random() + np.arange(n)) / n
        cumulative = np.cumsum(w)
        cumulative[-1] = 1.0
        idx = np.searchsorted(cumulative, positions)
        track.particles = track.particles[idx].copy()
        track.weights = np.full(n, 1.0 / n)

    def _spawn(self, z: np.ndarray, tick: int) -> None:
        n = self.config.particle_count
        sigma = max(self.config.measurement_noise, 0.05)
        particles = np.empty((n, 4))
        particles[:, 0:2] = z + self.rng.normal(0.0, sigma, size=(n, 2))
        particles[:, 2:4] = self.rng.normal(0.0, self.config.velocity_prior, size=(n, 2))
        history_len = max(2, int(round(self.config.closing_window
                                       * self.config.update_rate)) + 2)
        self.tracks.append(_Track(self._next_id, particles, tick, history_len))
        self._next_id += 1

    def update(self, detections: Sequence[Detection], dt: float) -> list[TrackedPerson]:
        """Predict all tracks, associate detections, resample, spawn, drop.

        An empty detection list is a valid coast step. Internal time is the
        tracker's own update count, one per call.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        self._tick += 1

        for track in self.tracks:
            self._predict(track, dt)

        # greedy nearest-neighbor association within the gate
        pairs: list[tuple[float, int, int]] = []
        for ti, track in enumerate(self.tracks):
            m = track.mean()[:2]
            gate = self._gate(track)
            for di, det in enumerate(detections):
                dist = float(np.linalg.norm(det.position - m))
                if dist <= gate:
                    pairs.append((dist, ti, di))
        pairs.sort(key=lambda p: (p[0], p[1], p[2]))
        matched_tracks: set[int] = set()
        matched_dets: set[int] = set()
        for _, ti, di in pairs:
            if ti in matched_tracks or di in matched_dets:
                continue
            matched_tracks.add(ti)
            matched_dets.add(di)
            track = self.tracks[ti]
            self._reweight_and_resample(track, detections[di].position)
            track.last_seen_tick = self._tick

        for di, det in enumerate(detections):
            if di not in matched_dets:
                self._spawn(det.position, self._tick)

        ticks_timeout = self.config.drop_timeout * self.config.update_rate
        self.tracks = [
            t for t in self.tracks
            if self._tick - t.last_seen_tick <= ticks_timeout + 1e-9
        ]
        return self.estimates()

    def record_distance(self, robot_position: np.ndarray, time: float) -> None:
        """Store per-track robot distance for closing-speed estimation."""
        for track in self.tracks:
            d = float(np.linalg.norm(track.mean()[:2] - np.asarray(robot_position)))
            track.distance_history.append((time, d))

    def closing_speed(self, track_id: int) -> Optional[float]:
        for track in self.tracks:
            if track.id == track_id:
                return relative_closing_speed(
                    list(track.distance_history), self.config.closing_window)
        return None

    def estimates(self) -> list[TrackedPerson]:
        out = []
        for track in sorted(self.tracks, key=lambda t: t.id):
            m = track.mean()
            out.append(TrackedPerson(
                id=track.id,
                position_estimate=m[:2].copy(),
                velocity_estimate=m[2:4].copy(),
                position_spread=track.spread(),
                last_seen_tick=track.last_seen_tick,
            ))
        return out


class PerfectTracker:
    """Zero-noise, no-occlusion stand-in with the PeopleTracker interface.

    Emits ground-truth positions and finite-difference velocities; used by
    oracle tests and perfect-perception scenarios.
    """

    def __init__(self, config: TrackerConfig):
        self.config = config
        self._prev: dict[int, np.ndarray] = {}
        self._velocity: dict[int, np.ndarray] = {}
        self._history: dict[int, deque[tuple[float, float]]] = {}
        self._last_tick = 0

    def observe(self, pedestrians: Sequence[PedestrianState], tick: int,
                dt: float) -> list[TrackedPerson]:
        out = []
        for i, ped in enumerate(pedestrians):
            if i in self._prev:
                vel = (ped.position - self._prev[i]) / dt
            else:
                vel = ped.velocity.copy()
            self._prev[i] = ped.position.copy()
            self._velocity[i] = vel
            out.append(TrackedPerson(
                id=i,
                position_estimate=ped.position.copy(),
                velocity_estimate=vel,
                position_spread=0.0,
                last_seen_tick=tick,
            ))
        self._last_tick = tick
        return out

    def record_distance(self, robot_position: np.ndarray, time: float) -> None:
        history_len = max(2, int(round(self.config.closing_window
                                       * self.config.update_rate)) + 2)
        for i, pos in self._prev.items():
            h = self._history.setdefault(i, deque(maxlen=history_len))
            h.append((time, float(np.linalg.norm(pos - np.asarray(robot_position)))))

    def closing_speed(self, track_id: int) -> Optional[float]:
        h = self._history.get(track_id)
        if h is None:
            return None
        return relative_closing_speed(list(h), self.config.closing_window)
