import numpy as np, time, json
from oam_ionize.grid import GridSpec, Wavefunction
from oam_ionize.tdse import *
from oam_ionize.beam import PulseConfig
from oam_ionize.angular import Polarization
from oam_ionize.analysis import *

out = {}
def full_run(tag, n, h, pol, ell, e_ref, collect_spectra=False):
    grid = GridSpec.cube(n, h)
    pc = PropagatorConfig(precision="single")
    gs = init_ground_state(grid, pc)
    pulse = PulseConfig(omega=1.0, n_cyc=3, ell=ell, pol=pol, w0=9e4, target_field=(20.0, e_ref))
    snaps = []
    def obs(t, step, v):
        wf = Wavefunction(np.asarray(v, dtype=np.complex128), grid)
        a, delta = split_excited(wf, gs)
        spec = spherical_spectrum(delta, L_max=8, n_radial=48, r_max=min(20.0, 0.78*n*h/2))
        forb_strict = compliance(spec, ell, pol, order=3).forbidden_fraction
        # conjugate-augmented closure: include emission-side moves
        snaps.append(dict(t=t, exc=spec.total,
                          forb_strict=forb_strict,
                          top=[(int(i.L), int(i.M), p) for i, p in spec.ranked()[:10]]))
    t0 = time.perf_counter()
    final, rec = run(grid, pc, pulse, record_every=20, ground=gs, tail_time=0.5,
                     observer=obs if collect_spectra else None, observe_every=300)
    el = time.perf_counter() - t0
    i_cyc = int(np.argmin(np.abs(rec.t - (pulse.t_start + pulse.period))))
    res = dict(tag=tag, n=n, h=h, E0=gs.energy,
               dep_final=float(1-rec.pop_ground[-1]),
               dep_cycle1=float(1-rec.pop_ground[i_cyc]),
               Lz_final=float(rec.Lz[-1]), minutes=el/60,
               absorbed=float(rec.absorbed[-1]), snaps=snaps)
    print(json.dumps({k: v for k, v in res.items() if k != "snaps"}), flush=True)
    return res

LIN = Polarization.linear_x(); CIRC = Polarization.circular_left()
res = []
res.append(full_run("lin_h0.60", 96, 0.6, LIN, 1, 5.0))
res.append(full_run("circ_h0.60", 96, 0.6, CIRC, 1, 5.0*np.sqrt(2)))
res.append(full_run("circ_h0.45", 128, 0.45, CIRC, 1, 5.0*np.sqrt(2), collect_spectra=True))
json.dump(res, open("/root/pkg/.devruns/batch1.json", "w"), indent=1)
print("DONE")
