"""From raw samples to per-window features.

Builds a short synthetic drive, slices it into overlapping windows, and
prints the steering / yaw / eyelid features the extractors produce for
each window. Run with:  python3 demos/01_trace_and_features.py
"""

from fatiguekit import (
    ScenarioSpec,
    Segment,
    extract_features,
    generate_scenario,
    make_windows,
)


def main() -> None:
    # Four minutes of clean driving followed by four minutes of weaving.
    spec = ScenarioSpec(duration=480.0, seed=11, segments=(
        Segment(0.0, 240.0, "alert"),
        Segment(240.0, 480.0, "drowsy")))
    frames = generate_scenario(spec)

    print(f"trace: {len(frames)} frames spanning "
          f"{frames[0].t:.1f}–{frames[-1].t:.1f} s")

    windows = make_windows(frames, length=60.0, stride=30.0)
    print(f"windows: {len(windows)} of 60 s every 30 s\n")

    header = f"{'start':>6} {'mean|swa|':>10} {'corr/min':>9} {'apen':>7} " \
             f"{'var yaw':>8} {'blinks/min':>10}"
    print(header)
    print("-" * len(header))
    for w in windows:
        fv, notes = extract_features(w)
        apen = f"{fv.swa_apen:.3f}" if fv.swa_apen is not None else "—"
        print(f"{w.start_t:>6.0f} {fv.mean_swa_abs:>10.2f} "
              f"{fv.swa_correction_freq:>9.1f} {apen:>7} "
              f"{fv.var_yaw:>8.3f} {fv.blink_freq:>10.1f}")
        for note in notes:
            print(f"       note: {note}")

    print("\nThe weaving half shows up immediately: mean steering deflection "
          "jumps past 10°, corrections exceed a dozen per minute, and the "
          "yaw variance rises by two orders of magnitude.")


if __name__ == "__main__":
    main()
