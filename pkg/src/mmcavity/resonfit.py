"""One-port reflection (S11) lineshape model and fitting.

Model (ideal resonator dressed by an instrument environment):

    S11(f) = a * exp(i phi) * exp(-2 pi i f tau)
             * [1 - (2 Qtot/Qc) / (1 + 2 i Qtot (f/f0 - 1))]

Fitting is fully deterministic: electrical delay from the off-resonant
phase slope, algebraic circle fit in the complex plane, phase-vs-frequency
fit for (f0, Qtot), then simultaneous complex least squares of all six
parameters. Both magnitude and phase enter with uniform complex weights.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import hbar
from scipy.optimize import least_squares

from .errors import DomainError, NoResonanceError


@dataclass(frozen=True)
class ReflectionTrace:
    """Frequency-indexed complex S11 samples (linear units)."""

    frequencies_hz: np.ndarray
    s11: np.ndarray
    power_in_w: float | None = None
    temperature_k: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies_hz, dtype=float)
        z = np.asarray(self.s11, dtype=complex)
        if f.shape != z.shape or f.ndim != 1:
            raise DomainError("frequencies and s11 must be 1-D arrays of equal length")
        if len(f) < 16:
            raise DomainError(f"trace needs >= 16 points, got {len(f)}")
        if not np.all(np.diff(f) > 0):
            raise DomainError("frequencies must be strictly increasing")
        if not np.all(np.isfinite(z)):
            raise DomainError("s11 samples must be finite")
        f.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "frequencies_hz", f)
        object.__setattr__(self, "s11", z)

    @property
    def span_hz(self) -> float:
        return float(self.frequencies_hz[-1] - self.frequencies_hz[0])

    def save_csv(self, path, sidecar_path=None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_hz", "re_s11", "im_s11"])
            for f, z in zip(self.frequencies_hz, self.s11):
                w.writerow([f"{f:.10g}", f"{z.real:.10g}", f"{z.imag:.10g}"])
        if sidecar_path is not None:
            meta = {}
            if self.power_in_w is not None:
                meta["power_dbm"] = watt_to_dbm(self.power_in_w)
            if self.temperature_k is not None:
                meta["temperature_k"] = self.temperature_k
            with open(sidecar_path, "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def load_csv(cls, path, sidecar_path=None) -> "ReflectionTrace":
        fs, res, ims = [], [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                fs.append(float(row["freq_hz"]))
                res.append(float(row["re_s11"]))
                ims.append(float(row["im_s11"]))
        power = temp = None
        if sidecar_path is not None:
            with open(sidecar_path) as fh:
                meta = json.load(fh)
            if "power_dbm" in meta:
                power = dbm_to_watt(meta["power_dbm"])
            temp = meta.get("temperature_k")
        return cls(np.array(fs), np.array(res) + 1j * np.array(ims), power, temp)


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3)


def dbm_to_watt(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


@dataclass(frozen=True)
class ResonanceFit:
    """Extracted resonator and environment parameters.

    The harmonic-sum identity 1/Qtot = 1/Qi + 1/Qc is enforced on
    construction (Qtot is derived, never fit independently).
    """

    f0_hz: float
    qi: float
    qc: float
    amplitude: float = 1.0
    phase_rad: float = 0.0
    delay_s: float = 0.0
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.f0_hz > 0 and self.qi > 0 and self.qc > 0):
            raise DomainError("f0, Qi and Qc must all be positive")

    @property
    def qtot(self) -> float:
        return 1.0 / (1.0 / self.qi + 1.0 / self.qc)

    def to_json(self) -> str:
        doc = {
            "f0_hz": self.f0_hz,
            "qi": self.qi,
            "qc": self.qc,
            "qtot": self.qtot,
            "a": self.amplitude,
            "phi_rad": self.phase_rad,
            "tau_s": self.delay_s,
            "residual": self.residual,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ResonanceFit":
        d = json.loads(text)
        return cls(d["f0_hz"], d["qi"], d["qc"], d["a"], d["phi_rad"], d["tau_s"], d.get("residual", 0.0))


def model_s11(fit: ResonanceFit, f) -> np.ndarray:
    """Evaluate the dressed one-port reflection model at frequency f (Hz)."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("frequencies must be positive")
    qt = fit.qtot
    resonator = 1.0 - (2.0 * qt / fit.qc) / (1.0 + 2.0j * qt * (f / fit.f0_hz - 1.0))
    env = fit.amplitude * np.exp(1j * fit.phase_rad) * np.exp(-2j * np.pi * f * fit.delay_s)
    return env * resonator


def synth_trace(
    fit: ResonanceFit,
    span_hz: float,
    points: int = 201,
    noise_sigma: float = 0.0,
    seed: int = 0,
    power_in_w: float | None = None,
    temperature_k: float | None = None,
) -> ReflectionTrace:
    """Sample the model on a uniform grid around f0 plus complex white noise.

    noise_sigma is the standard deviation of the complex sample
    (E|n|^2 = sigma^2, split evenly between quadratures). Deterministic for
    fixed seed.
    """
    if points < 16:
        raise DomainError(f"points must be >= 16, got {points}")
    if span_hz <= 0:
        raise DomainError(f"span must be positive, got {span_hz}")
    f = fit.f0_hz + np.linspace(-0.5, 0.5, points) * span_hz
    z = model_s11(fit, f)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        scale = noise_sigma / math.sqrt(2.0)
        z = z + scale * (rng.standard_normal(points) + 1j * rng.standard_normal(points))
    return ReflectionTrace(f, z, power_in_w, temperature_k)


def _fit_circle(z: np.ndarray):
    """Algebraic (Kasa) circle fit; returns (center, radius)."""
    x, y = z.real, z.imag
    a_mat = np.column_stack([x, y, np.ones_like(x)])
    b = x**2 + y**2
    sol, *_ = np.linalg.lstsq(a_mat, b, rcond=None)
    cx, cy = 0.5 * sol[0], 0.5 * sol[1]
    r = math.sqrt(max(sol[2] + cx**2 + cy**2, 0.0))
    return complex(cx, cy), r


def _estimate_delay(f: np.ndarray, z: np.ndarray) -> float:
    """Electrical delay from the off-resonant phase slope (trace edges)."""
    n = len(f)
    k = max(4, n // 10)
    idx = np.r_[0:k, n - k : n]
    phase = np.unwrap(np.angle(z))
    slope = np.polyfit(f[idx], phase[idx], 1)[0]
    return -slope / (2 * np.pi)


def _noise_estimate(z: np.ndarray) -> float:
    """Robust per-sample complex noise from second differences."""
    d2 = np.diff(z, n=2)
    if len(d2) == 0:
        return 0.0
    return float(np.median(np.abs(d2))) / math.sqrt(6.0) * 1.4826


def fit_reflection(trace: ReflectionTrace, guess: ResonanceFit | None = None) -> ResonanceFit:
    """Fit (f0, Qi, Qc, a, phi, tau) to a reflection trace.

    Deterministic: circle-fit initialization followed by complex least
    squares; no random starts. Raises NoResonanceError when the trace shows
    no feature above the noise floor. Ill-conditioned fits are flagged in
    ``diagnostics`` rather than raised.
    """
    f = trace.frequencies_hz
    z = trace.s11

    if guess is None:
        tau0 = _estimate_delay(f, z)
        zc = z * np.exp(2j * np.pi * f * tau0)
        center, radius = _fit_circle(zc)
        noise = _noise_estimate(z)
        scale = float(np.max(np.abs(z)))
        if radius < max(4.0 * noise / math.sqrt(len(f)), 1e-12 * max(scale, 1e-300)):
            raise NoResonanceError(
                f"circle radius {radius:.3g} below noise floor "
                f"(noise {noise:.3g}, {len(f)} points)"
            )
        # resonance point sits diametrically opposite the off-resonant point
        z_edge = 0.5 * (np.mean(zc[:4]) + np.mean(zc[-4:]))
        i0 = int(np.argmin(np.abs(zc - (2 * center - z_edge))))
        f0_0 = float(f[i0])
        # phase of the centered data winds by 2*arctan(2 Qt (1 - f/f0));
        # Qtot from the slope at resonance: dtheta/df = -4 Qt / f0
        theta = np.unwrap(np.angle(zc - center))
        lo, hi = max(0, i0 - 3), min(len(f), i0 + 4)
        slope = np.polyfit(f[lo:hi], theta[lo:hi], 1)[0]
        qt0 = abs(slope) * f0_0 / 4.0
        qt0 = min(max(qt0, 10.0), 1e10)
        # off-resonant point is diametrically opposite the resonance point
        z_res = zc[i0]
        z_off = 2 * center - z_res
        a0 = max(abs(z_off), 1e-12)
        phi0 = float(np.angle(z_off))
        d_c = 2 * radius
        qc0 = 2.0 * qt0 * a0 / d_c
        qc0 = min(max(qc0, 1.0), 1e12)
        if qc0 >= qt0 * (1 + 1e-9):
            qi0 = 1.0 / max(1.0 / qt0 - 1.0 / qc0, 1e-12 / qt0)
        else:
            qi0 = 2 * qt0
        x0 = np.array([f0_0, math.log(qi0), math.log(qc0), math.log(a0), phi0, tau0])
    else:
        x0 = np.array(
            [
                guess.f0_hz,
                math.log(guess.qi),
                math.log(guess.qc),
                math.log(max(guess.amplitude, 1e-12)),
                guess.phase_rad,
                guess.delay_s,
            ]
        )

    f_scale = float(np.mean(f))

    def unpack(x):
        return ResonanceFit(
            f0_hz=x[0] * f_scale,
            qi=math.exp(x[1]),
            qc=math.exp(x[2]),
            amplitude=math.exp(x[3]),
            phase_rad=x[4],
            delay_s=x[5] / f_scale,
        )

    def residuals(x):
        m = model_s11(unpack(x), f)
        d = m - z
        return np.concatenate([d.real, d.imag])

    x0_scaled = x0.copy()
    x0_scaled[0] = x0[0] / f_scale
    x0_scaled[5] = x0[5] * f_scale
    lo = [f[0] / f_scale, math.log(1.0), math.log(1.0), math.log(1e-9), -20.0, -1e4]
    hi = [f[-1] / f_scale, math.log(1e12), math.log(1e12), math.log(1e6), 20.0, 1e4]
    x0_scaled = np.clip(x0_scaled, lo, hi)
    result = least_squares(residuals, x0_scaled, bounds=(lo, hi), method="trf", max_nfev=4000)
    fit = unpack(result.x)

    n_pts = len(f)
    rms = float(np.sqrt(np.mean(np.abs(model_s11(fit, f) - z) ** 2)))
    diagnostics = {"nfev": int(result.nfev), "converged": bool(result.success)}
    try:
        jtj = result.jac.T @ result.jac
        cond = float(np.linalg.cond(jtj))
        diagnostics["jtj_condition"] = cond
        diagnostics["ill_conditioned"] = bool(cond > 1e14)
        dof = max(2 * n_pts - len(result.x), 1)
        sigma2 = float(np.sum(result.fun**2)) / dof
        cov = np.linalg.pinv(jtj) * sigma2
        diagnostics["param_sigma"] = {
            "f0_hz": math.sqrt(max(cov[0, 0], 0.0)) * f_scale,
            "log_qi": math.sqrt(max(cov[1, 1], 0.0)),
            "log_qc": math.sqrt(max(cov[2, 2], 0.0)),
        }
    except np.linalg.LinAlgError:
        diagnostics["ill_conditioned"] = True
    linewidths = trace.span_hz / (fit.f0_hz / fit.qtot)
    diagnostics["span_linewidths"] = linewidths
    if linewidths < 3.0:
        diagnostics["narrow_span"] = True
    if not (f[0] <= fit.f0_hz <= f[-1]):
        raise NoResonanceError(f"fitted f0 = {fit.f0_hz:.6g} Hz outside the trace span")
    return replace(fit, residual=rms, diagnostics=diagnostics)


@dataclass(frozen=True)
class PhotonNumberEstimate:
    """Mean intracavity photon number with the conversion convention recorded."""

    n: float
    power_in_w: float
    f0_hz: float
    qi: float
    qc: float
    convention: str = "input-referred one-port, angular rates"

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("photon number cannot be negative")


def photon_number(fit: ResonanceFit, power_in_w: float) -> PhotonNumberEstimate:
    """Input-referred steady-state photon number.

    n = 4 kc P / (hbar w0 kt^2), with kt = w0/Qtot and kc = w0/Qc angular
    rates. Linear in drive power.
    """
    if power_in_w < 0:
        raise DomainError(f"input power must be >= 0, got {power_in_w}")
    w0 = 2 * np.pi * fit.f0_hz
    kt = w0 / fit.qtot
    kc = w0 / fit.qc
    n = 4.0 * kc * power_in_w / (hbar * w0 * kt**2)
    return PhotonNumberEstimate(n, power_in_w, fit.f0_hz, fit.qi, fit.qc)


def photon_number_stored(p_stored_w: float, f0_hz: float, qtot: float) -> PhotonNumberEstimate:
    """Stored-energy conversion: n = P_stored / (hbar w0 ktot).

    Alternative convention for instruments that report intracavity power.
    """
    if p_stored_w < 0:
        raise DomainError(f"stored power must be >= 0, got {p_stored_w}")
    w0 = 2 * np.pi * f0_hz
    kt = w0 / qtot
    n = p_stored_w / (hbar * w0 * kt)
    return PhotonNumberEstimate(
        n, p_stored_w, f0_hz, qtot, qtot, convention="stored-energy, angular rates"
    )


def linewidth_and_lifetime(f0_hz: float, q: float) -> tuple[float, float]:
    """(kappa, tau): linewidth kappa = f0/Q in Hz, lifetime tau = Q/(2 pi f0)."""
    if not (f0_hz > 0 and q > 0):
        raise DomainError("f0 and Q must be positive")
    return f0_hz / q, q / (2 * np.pi * f0_hz)
