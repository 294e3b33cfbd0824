#!/usr/bin/env python3
"""Independent scalar oracle used to freeze expected values in the unit and
acceptance tests. Every formula here is evaluated directly from its closed
form, separately from the library implementation."""
import math

PLANCK = 6.62607015e-34  # J s


def db_to_lin(db):
    return 10.0 ** (db / 10.0)


def lin_to_db(x):
    return 10.0 * math.log10(x)


def dbm_to_w(dbm):
    return 1e-3 * 10.0 ** (dbm / 10.0)


def w_to_dbm(w):
    return 10.0 * math.log10(w / 1e-3)


def alpha_per_km(atten_db_per_km):
    # dB/km -> 1/km (power attenuation coefficient)
    return atten_db_per_km * math.log(10.0) / 10.0


def effective_length_km(atten_db_per_km, length_km):
    a = alpha_per_km(atten_db_per_km)
    if a == 0.0:
        return length_km
    return (1.0 - math.exp(-a * length_km)) / a


def ase_power_w(gain_db, nf_db, carrier_hz, ref_bw_hz):
    return db_to_lin(nf_db) * PLANCK * carrier_hz * (db_to_lin(gain_db) - 1.0) * ref_bw_hz


def nli_psd_w_per_hz(length_km, atten_db_per_km, beta2_ps2_km, gamma_per_w_km,
                     gwdm_w_per_hz, bwdm_hz):
    leff_m = effective_length_km(atten_db_per_km, length_km) * 1e3
    leffa_m = 1e3 / alpha_per_km(atten_db_per_km)   # asymptotic effective length, 1/alpha
    beta2 = beta2_ps2_km * 1e-27                    # ps^2/km -> s^2/m
    gamma = gamma_per_w_km * 1e-3                   # 1/(W km) -> 1/(W m)
    arg = (math.pi ** 2 / 2.0) * beta2 * leffa_m * bwdm_hz ** 2
    return (8.0 / 27.0) * gamma ** 2 * leff_m ** 2 * gwdm_w_per_hz ** 3 \
        * math.asinh(arg) / (math.pi * beta2 * leffa_m)


def combine_snr_db(*snrs_db):
    return -lin_to_db(sum(1.0 / db_to_lin(s) for s in snrs_db))


def ber_dp_qpsk(snr_db):
    return 0.5 * math.erfc(math.sqrt(db_to_lin(snr_db) / 2.0))


def ber_dp_16qam(snr_db):
    return (3.0 / 8.0) * math.erfc(math.sqrt(db_to_lin(snr_db) / 10.0))


def required_gsnr_db(ber_fn, fec_limit):
    lo, hi = -10.0, 60.0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if ber_fn(mid) > fec_limit:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main():
    print("effective_length(0.2 dB/km, 80 km)  =", repr(effective_length_km(0.2, 80.0)))
    print("effective_length(0.2 dB/km, 56 km)  =", repr(effective_length_km(0.2, 56.0)))
    p = ase_power_w(20.0, 5.0, 193.4e12, 12.5e9)
    print("ase_power(20 dB, 5 dB, 193.4 THz, 12.5 GHz) =", repr(p), "W =", w_to_dbm(p), "dBm")

    # spec fixture: 56 km, 0.2 dB/km, beta2 21.7 ps^2/km, gamma 1.3 1/(W km),
    # G_wdm 1e-14 W/Hz, B_wdm 4.8 THz
    g = nli_psd_w_per_hz(56.0, 0.2, 21.7, 1.3, 1e-14, 4.8e12)
    print("G_NLI(56 km fixture) =", repr(g), "W/Hz")
    print("P_NLI(63.1 GBd)      =", repr(g * 63.1e9), "W =", w_to_dbm(g * 63.1e9), "dBm")
    # same fixture evaluated with L_eff taken at 80 km (for comparison with a
    # hand value that appears to have reused the 80 km effective length)
    leff80 = effective_length_km(0.2, 80.0) * 1e3
    leff56 = effective_length_km(0.2, 56.0) * 1e3
    print("G_NLI if L_eff(80km) were used =", repr(g * (leff80 / leff56) ** 2))

    print("combine {20,30,25} dB =", repr(combine_snr_db(20.0, 30.0, 25.0)))
    print("combine equal x,x at 20 =", repr(combine_snr_db(20.0, 20.0)))
    print("ber dp-16qam @ 17 dB =", repr(ber_dp_16qam(17.0)))
    print("ber dp-qpsk  @ 10 dB =", repr(ber_dp_qpsk(10.0)))
    print("required dp-16qam @ 2e-2 =", repr(required_gsnr_db(ber_dp_16qam, 2e-2)))
    print("required dp-qpsk  @ 2e-2 =", repr(required_gsnr_db(ber_dp_qpsk, 2e-2)))

    # migration arithmetic: 25 GB over 3200 Gb/s at 0.8 utilization, 9.5 min setup
    transfer_s = 25e9 * 8.0 / (3.2e12 * 0.8)
    print("migration transfer =", repr(transfer_s), "s; total =", repr(9.5 + transfer_s / 60.0), "min")


if __name__ == "__main__":
    main()
