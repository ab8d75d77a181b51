//! Turnkey parameter sets for the published figures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::params::{DetuningSpec, SystemParams};
use crate::spectra::SpectrumKind;
use crate::sweep::{linspace, GridSpec, SweepAxis, SweepOutput, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig6,
        Self::Fig7,
        Self::Fig8,
        Self::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::Fig9 => "fig9",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig2..fig9)"))
    }
}

/// One sweep of a preset with its own base parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetRun {
    /// Series label, used in file names and plot legends.
    pub label: String,
    pub base: SystemParams,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub figure: Figure,
    pub description: &'static str,
    pub runs: Vec<PresetRun>,
    /// Columns plotted by default, (x, y) pairs.
    pub plots: Vec<(&'static str, &'static str)>,
}

/// Gain axis of the root-trajectory figures: G/kappa from 0 to 1.6 in steps of 0.02.
pub fn root_trajectory_gains() -> Vec<f64> {
    linspace(0.0, 1.6, 81)
}

pub const PRESET_POWERS_MW: [f64; 3] = [0.6, 6.9, 10.7];
pub const PRESET_GAINS: [f64; 3] = [0.0, 1.3, 1.45];

fn spectrum_figure(kind: SpectrumKind, grid: GridSpec) -> Vec<PresetRun> {
    vec![PresetRun {
        label: "gain".into(),
        base: SystemParams::reference(),
        spec: SweepSpec {
            axis: SweepAxis::ParametricGain,
            values: PRESET_GAINS.to_vec(),
            outputs: vec![SweepOutput::Spectrum(kind)],
            grid,
            noise: None,
        },
    }]
}

fn power_figure(base: SystemParams, grid: GridSpec) -> Vec<PresetRun> {
    vec![PresetRun {
        label: "power".into(),
        base,
        spec: SweepSpec {
            axis: SweepAxis::LaserPower,
            values: PRESET_POWERS_MW.to_vec(),
            outputs: vec![SweepOutput::Spectrum(SpectrumKind::SQ)],
            grid,
            noise: None,
        },
    }]
}

pub fn preset(figure: Figure, grid: GridSpec) -> Preset {
    let trajectory = || {
        [6.9, 10.7]
            .into_iter()
            .map(|mw| PresetRun {
                label: format!("{mw}mW"),
                base: SystemParams::reference().with_power_mw(mw),
                spec: SweepSpec {
                    axis: SweepAxis::ParametricGain,
                    values: root_trajectory_gains(),
                    outputs: vec![
                        SweepOutput::Roots,
                        SweepOutput::Stability,
                        SweepOutput::SplittingEstimate,
                        SweepOutput::PhotonNumber,
                    ],
                    grid,
                    noise: None,
                },
            })
            .collect()
    };
    let spectrum_plot = vec![("omega_over_omega_m", "value_scaled")];
    match figure {
        Figure::Fig2 => Preset {
            figure,
            description: "real parts of the positive-frequency roots of d(omega) versus G",
            runs: trajectory(),
            plots: vec![
                ("g_over_kappa", "root1_re_over_omega_m"),
                ("g_over_kappa", "root2_re_over_omega_m"),
            ],
        },
        Figure::Fig3 => Preset {
            figure,
            description: "imaginary parts of the positive-frequency roots of d(omega) versus G",
            runs: trajectory(),
            plots: vec![
                ("g_over_kappa", "root1_im_over_omega_m"),
                ("g_over_kappa", "root2_im_over_omega_m"),
            ],
        },
        Figure::Fig4 => Preset {
            figure,
            description: "scaled mirror position spectrum for G/kappa = 0, 1.3, 1.45",
            runs: spectrum_figure(SpectrumKind::SQ, grid),
            plots: spectrum_plot,
        },
        Figure::Fig5 => Preset {
            figure,
            description: "output field spectrum for G/kappa = 0, 1.3, 1.45",
            runs: spectrum_figure(SpectrumKind::Scout, grid),
            plots: spectrum_plot,
        },
        Figure::Fig6 => Preset {
            figure,
            description: "output x-quadrature spectrum for G/kappa = 0, 1.3, 1.45",
            runs: spectrum_figure(SpectrumKind::Sxout, grid),
            plots: spectrum_plot,
        },
        Figure::Fig7 => Preset {
            figure,
            description: "output y-quadrature spectrum for G/kappa = 0, 1.3, 1.45",
            runs: spectrum_figure(SpectrumKind::Syout, grid),
            plots: spectrum_plot,
        },
        Figure::Fig8 => Preset {
            figure,
            description: "scaled mirror position spectrum versus power, G = 1.3 kappa, degenerate detuning",
            runs: power_figure(
                SystemParams::reference()
                    .with_gain_over_kappa(1.3)
                    .with_detuning(DetuningSpec::Degenerate),
                grid,
            ),
            plots: spectrum_plot,
        },
        Figure::Fig9 => Preset {
            figure,
            description: "scaled mirror position spectrum versus power, G = 0, Delta = omega_m",
            runs: power_figure(SystemParams::reference(), grid),
            plots: spectrum_plot,
        },
    }
}
