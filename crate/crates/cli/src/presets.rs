//! Named experiments reproducing each published figure at desk scale.

use crate::spec::{
    AngleGrid, ArraySpec, BeamSector, CodebookTarget, Experiment, ExperimentSpec, HybridSpec,
    Lemma1Table, McSpec, OutputSpec, Role, ScenarioSpec, SectorSpec, Technique,
};

pub struct Preset {
    pub name: &'static str,
    pub figure: &'static str,
    pub build: fn() -> ExperimentSpec,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig3",
        figure: "CDF of the analog far-field gain against its Gaussian model",
        build: fig3,
    },
    Preset {
        name: "variance",
        figure: "analog pattern variance at 115 deg versus subset size",
        build: variance,
    },
    Preset {
        name: "fig4",
        figure: "analog secrecy rate versus eavesdropper angle, N_T = 32",
        build: fig4,
    },
    Preset {
        name: "fig4-n16",
        figure: "analog secrecy rate versus eavesdropper angle, N_T = 16",
        build: fig4_n16,
    },
    Preset {
        name: "fig5",
        figure: "analog secrecy rate averaged over 110..130 deg versus subset size",
        build: fig5,
    },
    Preset {
        name: "fig6",
        figure: "digital and hybrid artificial-noise patterns, N_RF = 8",
        build: fig6,
    },
    Preset {
        name: "fig6-omp",
        figure: "OMP residual of the fig6 noise beam, fixed versus switched dictionary",
        build: fig6_omp,
    },
    Preset {
        name: "fig7",
        figure: "artificial-noise secrecy rate versus eavesdropper angle at eps = 0.5",
        build: fig7,
    },
    Preset {
        name: "fig8",
        figure: "secrecy rate versus power fraction, omnidirectional noise, 6-bit",
        build: fig8,
    },
    Preset {
        name: "fig9a",
        figure: "secrecy rate versus power fraction, omnidirectional noise, 8-bit",
        build: fig9a,
    },
    Preset {
        name: "fig9b",
        figure: "secrecy rate versus power fraction, noise 30 deg each side of the receiver",
        build: fig9b,
    },
    Preset {
        name: "fig9c",
        figure: "secrecy rate versus power fraction, noise 15 deg each side of the receiver",
        build: fig9c,
    },
    Preset {
        name: "two-sector",
        figure: "multisector broadcast pattern, receivers at 40-60 and 120-140 deg",
        build: two_sector,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn array(n: usize) -> ArraySpec {
    ArraySpec {
        n_antennas: n,
        spacing_ratio: 0.5,
        n_rf: 1,
        phase_bits: 8,
        group_size: None,
    }
}

fn hybrid_array(n_rf: usize, bits: u32) -> ArraySpec {
    ArraySpec {
        n_rf,
        phase_bits: bits,
        group_size: Some(8),
        ..array(32)
    }
}

fn scenario(theta_rx_deg: f64) -> ScenarioSpec {
    ScenarioSpec {
        theta_rx_deg,
        ..ScenarioSpec::default()
    }
}

fn mc(n_trials: usize) -> McSpec {
    McSpec {
        n_trials,
        seed: 2024,
        lanes: None,
        symbols_per_trial: 256,
    }
}

fn spec(
    name: &str,
    experiment: Experiment,
    array: ArraySpec,
    scenario: ScenarioSpec,
    sectors: Option<SectorSpec>,
    mc: McSpec,
) -> ExperimentSpec {
    ExperimentSpec {
        name: Some(name.to_string()),
        experiment,
        array,
        scenario,
        sectors,
        mc,
        output: OutputSpec::default(),
        plot: None,
    }
}

fn range(start: f64, stop: f64, step: f64) -> AngleGrid {
    AngleGrid::Range { start, stop, step }
}

fn omni() -> Option<SectorSpec> {
    Some(SectorSpec::Omni { step_deg: 1.0 })
}

fn fig3() -> ExperimentSpec {
    spec(
        "fig3",
        Experiment::Lemma1 {
            table: Lemma1Table::Cdf,
            m: vec![48],
            theta_deg: vec![60.0],
            cdf_points: 201,
        },
        array(64),
        scenario(100.0),
        None,
        mc(100_000),
    )
}

fn variance() -> ExperimentSpec {
    spec(
        "variance",
        Experiment::Lemma1 {
            table: Lemma1Table::Moments,
            m: (1..=15).map(|k| 2 * k).collect(),
            theta_deg: vec![115.0],
            cdf_points: 201,
        },
        array(32),
        scenario(120.0),
        None,
        mc(100_000),
    )
}

fn analog_theta(name: &str, n: usize) -> ExperimentSpec {
    spec(
        name,
        Experiment::SweepTheta {
            technique: Technique::Analog { m: 12 },
            theta_deg: range(0.0, 180.0, 1.0),
        },
        array(n),
        scenario(120.0),
        None,
        mc(1000),
    )
}

fn fig4() -> ExperimentSpec {
    analog_theta("fig4", 32)
}

fn fig4_n16() -> ExperimentSpec {
    analog_theta("fig4-n16", 16)
}

fn fig5() -> ExperimentSpec {
    spec(
        "fig5",
        Experiment::SweepM {
            m: (1..=16).map(|k| 2 * k).collect(),
            theta_deg: range(110.0, 130.0, 1.0),
        },
        array(32),
        scenario(120.0),
        None,
        mc(1000),
    )
}

fn fig6() -> ExperimentSpec {
    spec(
        "fig6",
        Experiment::Pattern {
            epsilon: 0.1,
            step_deg: 0.5,
            hybrid: Some(HybridSpec { switching: true }),
            design_grid_len: 360,
        },
        hybrid_array(8, 8),
        scenario(90.0),
        Some(SectorSpec::Intervals {
            intervals_deg: vec![[0.0, 60.0], [120.0, 180.0]],
            step_deg: 1.0,
        }),
        mc(100),
    )
}

fn fig6_omp() -> ExperimentSpec {
    ExperimentSpec {
        name: Some("fig6-omp".into()),
        experiment: Experiment::Codebook {
            target: CodebookTarget::Noise,
            n_rf: (1..=12).collect(),
            design_grid_len: 360,
        },
        ..fig6()
    }
}

fn fig7() -> ExperimentSpec {
    spec(
        "fig7",
        Experiment::SweepTheta {
            technique: Technique::ArtificialNoise {
                epsilon: 0.5,
                hybrid: Some(HybridSpec { switching: true }),
                design_grid_len: 360,
            },
            theta_deg: range(0.0, 180.0, 1.0),
        },
        hybrid_array(10, 6),
        scenario(120.0),
        omni(),
        mc(1000),
    )
}

fn eps_sweep(name: &str, bits: u32, sectors: Option<SectorSpec>) -> ExperimentSpec {
    spec(
        name,
        Experiment::SweepEps {
            theta_deg: 110.0,
            epsilon: range(0.05, 0.95, 0.05),
            hybrid: Some(HybridSpec { switching: true }),
            design_grid_len: 360,
            c0: None,
        },
        hybrid_array(10, bits),
        scenario(120.0),
        sectors,
        mc(2000),
    )
}

fn fig8() -> ExperimentSpec {
    eps_sweep("fig8", 6, omni())
}

fn fig9a() -> ExperimentSpec {
    eps_sweep("fig9a", 8, omni())
}

fn fig9b() -> ExperimentSpec {
    eps_sweep(
        "fig9b",
        8,
        Some(SectorSpec::AroundReceiver {
            half_width_deg: 30.0,
            step_deg: 1.0,
        }),
    )
}

fn fig9c() -> ExperimentSpec {
    eps_sweep(
        "fig9c",
        8,
        Some(SectorSpec::AroundReceiver {
            half_width_deg: 15.0,
            step_deg: 1.0,
        }),
    )
}

fn two_sector() -> ExperimentSpec {
    // Nine 20 degree sectors; half the power goes to the two receiver sectors.
    let beams = (0..9)
        .map(|k| {
            let rx = k == 2 || k == 6;
            BeamSector {
                lo_deg: 20.0 * k as f64,
                hi_deg: 20.0 * (k + 1) as f64,
                alpha: if rx { 0.25 } else { 0.5 / 7.0 },
                role: if rx {
                    Role::Receiver
                } else {
                    Role::Eavesdropper
                },
            }
        })
        .collect();
    spec(
        "two-sector",
        Experiment::Multisector {
            beams,
            step_deg: 0.5,
            design_grid_len: 360,
            draws: 3,
            hybrid: Some(HybridSpec { switching: true }),
        },
        ArraySpec {
            n_rf: 2,
            phase_bits: 2,
            group_size: Some(4),
            ..array(16)
        },
        scenario(50.0),
        None,
        mc(100),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse;

    #[test]
    fn names_are_unique_and_cover_the_figures() {
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        for want in [
            "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9a", "fig9b", "fig9c",
        ] {
            assert!(names.contains(&want), "{want}");
        }
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }

    #[test]
    fn presets_round_trip_through_json() {
        for p in PRESETS {
            let s = (p.build)();
            let text = serde_json::to_string_pretty(&s).unwrap();
            assert_eq!(parse(&text).unwrap(), s, "{}", p.name);
        }
    }

    #[test]
    fn fig6_declares_its_hardware() {
        let s = (find("fig6").unwrap().build)();
        assert_eq!(s.array.n_antennas, 32);
        assert_eq!(s.array.n_rf, 8);
        assert_eq!(s.array.phase_bits, 8);
        assert_eq!(s.array.group_size, Some(8));
        assert!(matches!(s.experiment, Experiment::Pattern { epsilon, .. } if epsilon == 0.1));
    }
}
