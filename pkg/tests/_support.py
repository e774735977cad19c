"""Shared parameter builders for the test suite."""

from freqstab import SystemParameters, Thresholds


def make_params(**over):
    """Generic mid-size system; override fields per test."""
    base = dict(f_n=50.0, s_n=1000.0, h=4.0, k_n=0.5, k_v=0.0, k_l=1.0,
                k_w=10.0, r=0.05, f_h=0.3, t_r=10.0, p_gn=1000.0,
                p_new=1000.0, p_l0=1000.0, m=0.06, n=0.1, k_r=2000.0)
    base.update(over)
    return SystemParameters(**base)


def benchmark_params(**over):
    """Aggregated low-frequency operating point of the bundled step study."""
    base = dict(f_n=50.0, s_n=4305.797079324312, h=1.34, k_n=1.0 / 3.0,
                k_v=0.0, k_l=2.0, k_w=3.0, r=0.05, f_h=0.3, t_r=10.0,
                p_gn=4340.978823529412, p_new=1058.7411764705885,
                p_l0=4852.1, m=0.06, n=0.06, k_r=2000.0)
    base.update(over)
    return SystemParameters(**base)


def benchmark_thresholds(p, **over):
    kw = dict(k1=7.3, t_dist=0.5, f_d=0.033, df_ss_lim=0.2, df_max_lim=0.75,
              dp_sh=3.65, df_sh=0.33)
    kw.update(over)
    return Thresholds.derive(p, **kw)
