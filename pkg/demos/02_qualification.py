"""From numeric features to named bands.

Every feature value lands in exactly one half-open band [lo, hi): the lower
edge belongs to the band, the upper edge to the next one. Heart-rate bands
additionally depend on the driver profile's sex. Run with:
python3 demos/02_qualification.py
"""

from fatiguekit import DriverProfile, FeatureVector, default_scheme, qualify


def label(feature: str, value: float, sex: str = "unspecified") -> str:
    fv = FeatureVector(window_start=0.0, window_end=60.0, **{feature: value})
    (fact,) = qualify(fv, default_scheme(), DriverProfile(id="demo", sex=sex))
    return fact.class_label


def main() -> None:
    print("steering deflection, degrees (edges are lower-inclusive):")
    for value in (0.0, 5.999, 6.0, 9.999, 10.0, 25.0):
        print(f"  max |swa| = {value:>7.3f}  ->  {label('max_swa_abs', value)}")

    print("\nheart rate, bpm (bands depend on the profile):")
    for bpm in (48.0, 58.0, 68.0, 72.0, 80.0, 105.0):
        male = label("mean_bpm", bpm, "male")
        female = label("mean_bpm", bpm, "female")
        marker = "   <- differs" if male != female else ""
        print(f"  {bpm:>5.1f}  male={male:<17} female={female}{marker}")

    print("\na full window worth of features at once:")
    fv = FeatureVector(window_start=0.0, window_end=60.0,
                       mean_swa_abs=11.2, max_swa_abs=19.4,
                       swa_correction_freq=16.0, swa_angular_velocity_max=7.1,
                       var_yaw=2.1, yaw_accel_max=4.4,
                       perclos80=0.46, mean_bpm=57.0)
    facts = qualify(fv, default_scheme(), DriverProfile(id="demo", sex="male"))
    for fact in facts:
        print(f"  {fact.individual:<28} {fact.class_label:<26} "
              f"(value {fact.value:g})")


if __name__ == "__main__":
    main()
