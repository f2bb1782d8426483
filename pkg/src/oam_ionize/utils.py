"""Shared plumbing: worker-thread resolution and FFT wrappers."""

from __future__ import annotations

import os

import scipy.fft as _fft

__all__ = ["get_workers", "set_workers", "fft3", "ifft3", "fft_axis", "ifft_axis"]

_workers: int | None = None


def set_workers(n: int | None) -> None:
    """Pin the FFT worker count (CLI --threads); None restores auto."""
    global _workers
    _workers = n


def get_workers() -> int:
    if _workers is not None:
        return _workers
    env = os.environ.get("OAM_IONIZE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def fft3(a):
    return _fft.fftn(a, workers=get_workers(), overwrite_x=True)


def ifft3(a):
    return _fft.ifftn(a, workers=get_workers(), overwrite_x=True)


def fft_axis(a, axis: int):
    return _fft.fft(a, axis=axis, workers=get_workers(), overwrite_x=True)


def ifft_axis(a, axis: int):
    return _fft.ifft(a, axis=axis, workers=get_workers(), overwrite_x=True)
