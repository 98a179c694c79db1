#![allow(dead_code)]

use qkl::linalg::c;
use qkl::model::{
    build_feedback_squeezer_controller, build_feedback_squeezer_plant, build_squeezer_controller,
    build_squeezer_plant,
};
use qkl::{QuantumSystem, Scheme, SqueezerParams};

pub struct Config {
    pub name: &'static str,
    pub scheme: Scheme,
    pub plant: QuantumSystem,
    pub controller: Option<QuantumSystem>,
}

fn nofb(name: &'static str, chi: f64, chi_c: f64) -> Config {
    Config {
        name,
        scheme: Scheme::Coherent,
        plant: build_squeezer_plant(&SqueezerParams::real(4.0, &[4.0], chi), &[c(0.2), c(-0.2)])
            .unwrap(),
        controller: Some(
            build_squeezer_controller(&SqueezerParams::real(16.0, &[16.0], chi_c)).unwrap(),
        ),
    }
}

fn fb(name: &'static str, chi: f64, chi_c: f64) -> Config {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Config {
        name,
        scheme: Scheme::CoherentFeedback,
        plant: build_feedback_squeezer_plant(
            &SqueezerParams::real(4.0, &[2.0, 2.0], chi),
            &[c(s), c(-s)],
        )
        .unwrap(),
        controller: Some(
            build_feedback_squeezer_controller(&SqueezerParams::real(16.0, &[8.0, 8.0], chi_c))
                .unwrap(),
        ),
    }
}

/// The eight figure configurations plus a lone passive cavity.
pub fn configurations() -> Vec<Config> {
    vec![
        Config {
            name: "cavity",
            scheme: Scheme::Classical,
            plant: build_squeezer_plant(
                &SqueezerParams::real(4.0, &[4.0], 0.0),
                &[c(0.2), c(-0.2)],
            )
            .unwrap(),
            controller: None,
        },
        nofb("fig3", 0.0, 2.0),
        nofb("fig4", 0.5, 0.0),
        nofb("fig5", 1.0, 4.0),
        fb("thm4", 0.0, 0.0),
        fb("fig6", 0.5, 0.0),
        fb("fig7", 0.0, -0.5),
        fb("fig8", 1.0, -0.5),
        fb("fig9", 0.5, 0.5),
    ]
}

pub fn config(name: &str) -> Config {
    configurations()
        .into_iter()
        .find(|c| c.name == name)
        .unwrap()
}
