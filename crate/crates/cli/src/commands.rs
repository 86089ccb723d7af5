//! One function per subcommand; each reads its inputs, delegates to the
//! library and renders the result.

use std::path::Path;

use amplitude_core::amplitudes::{purify as purify_factor, purify_blockwise};
use amplitude_core::central::{component_amplitudes, decompose as central_decompose};
use amplitude_core::io::{self, ChainJson, FormJson, FunctionalJson, QuasifreeJson};
use amplitude_core::linalg::{real, CMat};
use amplitude_core::modular::kms_defect_against;
use amplitude_core::quasifree::reduce;
use amplitude_core::restriction::{
    build_lumped_diagonal_chain, build_product_chain, chain_amplitudes, geometric_weights,
    PRODUCT_CHAIN_CAP,
};
use amplitude_core::{
    geometric_mean, inequality_suite, transition_amplitude, uhlmann_fidelity, Functional,
    PositiveForm, Tolerances,
};
use serde::Serialize;

use crate::output;
use crate::{ChainArgs, CliError, Site};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn functional(path: &Path, tol: Tolerances) -> Result<Functional, CliError> {
    let parsed: FunctionalJson = io::from_str(&read(path)?)?;
    Ok(parsed.build(tol)?)
}

fn positive_form(path: &Path, tol: Tolerances) -> Result<PositiveForm, CliError> {
    let parsed: FormJson = io::from_str(&read(path)?)?;
    Ok(PositiveForm::from_hermitian(parsed.build(tol)?)?)
}

fn report<T: Serialize>(value: &T, csv: bool) -> String {
    if csv {
        output::flat_csv(value)
    } else {
        output::json(value)
    }
}

#[derive(Serialize)]
struct AmplitudeReport {
    amplitude: f64,
}

pub fn amp(phi: &Path, psi: &Path, tol: Tolerances, csv: bool) -> Result<String, CliError> {
    let amplitude = transition_amplitude(&functional(phi, tol)?, &functional(psi, tol)?)?;
    Ok(report(&AmplitudeReport { amplitude }, csv))
}

#[derive(Serialize)]
struct FidelityReport {
    fidelity: f64,
    amplitude: f64,
}

pub fn fidelity(phi: &Path, psi: &Path, tol: Tolerances, csv: bool) -> Result<String, CliError> {
    let (a, b) = (functional(phi, tol)?, functional(psi, tol)?);
    let r = FidelityReport {
        fidelity: uhlmann_fidelity(&a, &b)?,
        amplitude: transition_amplitude(&a, &b)?,
    };
    Ok(report(&r, csv))
}

pub fn gmean(alpha: &Path, beta: &Path, tol: Tolerances) -> Result<String, CliError> {
    let mean = geometric_mean(&positive_form(alpha, tol)?, &positive_form(beta, tol)?)?;
    Ok(output::json(&FormJson::of(mean.gram())))
}

pub fn purify(phi: &Path, blockwise: bool, tol: Tolerances) -> Result<String, CliError> {
    let phi = functional(phi, tol)?;
    let pure = if blockwise {
        purify_blockwise(&phi)?
    } else {
        purify_factor(&phi)?
    };
    Ok(output::json(&FunctionalJson::of(&pure)))
}

pub fn ineq(phi: &Path, psi: &Path, tol: Tolerances, csv: bool) -> Result<String, CliError> {
    let r = inequality_suite(&functional(phi, tol)?, &functional(psi, tol)?)?;
    Ok(report(&r, csv))
}

fn site_density(site: Site) -> CMat {
    let entries: [f64; 4] = match site {
        Site::Pure0 => [1.0, 0.0, 0.0, 0.0],
        Site::Pure1 => [0.0, 0.0, 0.0, 1.0],
        Site::Plus => [0.5, 0.5, 0.5, 0.5],
        Site::Mixed => [0.5, 0.0, 0.0, 0.5],
    };
    CMat::from_row_iterator(2, 2, entries.into_iter().map(real))
}

/// Rows `n, a_n, a_n − a_{n+1}`; the last defect cell is empty.
fn chain_csv(amps: &[f64]) -> String {
    let rows: Vec<Vec<String>> = amps
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let defect = amps
                .get(i + 1)
                .map(|&b| output::num(a - b))
                .unwrap_or_default();
            vec![(i + 1).to_string(), output::num(a), defect]
        })
        .collect();
    output::csv(&["n", "a_n", "defect"], &rows)
}

pub fn chain(args: &ChainArgs, tol: Tolerances) -> Result<String, CliError> {
    let amps = if let Some(path) = &args.spec {
        let parsed: ChainJson = io::from_str(&read(path)?)?;
        let input = parsed.build(tol)?;
        chain_amplitudes(&input.phi, &input.psi, &input.chain)?
    } else if let Some(n) = args.product_chain {
        let a = site_density(args.site_a.expect("required by clap"));
        let b = site_density(args.site_b.expect("required by clap"));
        let pc = build_product_chain(&a, &b, n, PRODUCT_CHAIN_CAP)?;
        chain_amplitudes(&pc.phi, &pc.psi, &pc.chain)?
    } else {
        let n = args.lumped.expect("one chain source is required by clap");
        let p = geometric_weights(args.lambda.expect("required by clap"), n)?;
        let q = geometric_weights(args.mu.expect("required by clap"), n)?;
        let lc = build_lumped_diagonal_chain(&p, &q)?;
        chain_amplitudes(&lc.phi, &lc.psi, &lc.chain)?
    };
    Ok(chain_csv(&amps))
}

pub fn decompose(
    phi: &Path,
    psi: &Path,
    mu: Option<&[f64]>,
    tol: Tolerances,
) -> Result<String, CliError> {
    let (phi, psi) = (functional(phi, tol)?, functional(psi, tol)?);
    let (weights, terms) = component_amplitudes(&phi, &psi, mu)?;
    let dphi = central_decompose(&phi, Some(&weights))?;
    let dpsi = central_decompose(&psi, Some(&weights))?;
    let mut rows = Vec::with_capacity(weights.len() + 1);
    for k in 0..weights.len() {
        let amplitude = match (&dphi.components()[k], &dpsi.components()[k]) {
            (Some(a), Some(b)) => output::num(transition_amplitude(a, b)?),
            _ => String::new(),
        };
        rows.push(vec![
            k.to_string(),
            output::num(weights[k]),
            output::num(dphi.densities()[k]),
            output::num(dpsi.densities()[k]),
            amplitude,
            output::num(terms[k]),
            String::new(),
        ]);
    }
    let lhs = transition_amplitude(&phi, &psi)?;
    let rhs: f64 = terms.iter().sum();
    rows.push(vec![
        "total".into(),
        output::num(weights.iter().sum()),
        String::new(),
        String::new(),
        output::num(lhs),
        output::num(rhs),
        output::num((lhs - rhs).abs()),
    ]);
    Ok(output::csv(
        &[
            "block",
            "weight",
            "phi_density",
            "psi_density",
            "component_amplitude",
            "term",
            "defect",
        ],
        &rows,
    ))
}

/// Largest KMS defect over all pairs of matrix units, per time.
pub fn kms(
    phi: &Path,
    state: Option<&Path>,
    times: &[f64],
    tol: Tolerances,
) -> Result<String, CliError> {
    let phi = functional(phi, tol)?;
    let omega = match state {
        Some(path) => functional(path, tol)?,
        None => phi.clone(),
    };
    let basis = phi.algebra().basis();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let mut worst = 0.0f64;
        for x in &basis {
            for y in &basis {
                worst = worst.max(kms_defect_against(&phi, &omega, x, y, t)?);
            }
        }
        rows.push(vec![output::num(t), output::num(worst)]);
    }
    Ok(output::csv(&["t", "max_defect"], &rows))
}

#[derive(Serialize)]
struct ReductionReport {
    kernel_dim: usize,
    reduced: QuasifreeJson,
    /// Row-major `d' × d` quotient map.
    quotient: Vec<f64>,
}

pub fn qf_reduce(triple: &Path, tol: Tolerances) -> Result<String, CliError> {
    let parsed: QuasifreeJson = io::from_str(&read(triple)?)?;
    let input = parsed.build(tol)?;
    let red = reduce(&input.space, &input.s, &input.t)?;
    let q = &red.quotient;
    let r = ReductionReport {
        kernel_dim: red.kernel_dim,
        reduced: QuasifreeJson::of(&red.space, &red.s, &red.t),
        quotient: (0..q.nrows())
            .flat_map(|i| (0..q.ncols()).map(move |j| q[(i, j)]))
            .collect(),
    };
    Ok(output::json(&r))
}
