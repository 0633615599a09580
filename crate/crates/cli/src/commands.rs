//! One function per subcommand: pull settings, run the physics, write
//! one deterministic artifact. Slots that emit nothing become stderr
//! warnings, never silent holes in the output.

use nalgebra::DVector;

use cvcluster_core::{
    conserves_orders, dual_rail_nullifiers, edge_weights, graph_from_nullifiers, lattice_2d,
    overlap_integral, ppt_scan, quadripartite_g, quadripartite_squeezed_combinations, supermodes,
    theta_grid, time_varying_lattice, CovarianceState, HGIndex, Lattice, LatticeSkipReason,
    SkipReason, Spatial,
};

use crate::config::{Cli, CliError, Command, Format, Settings};
use crate::export::{self, fmt_sig};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(cli.command.args())?;
    match cli.command {
        Command::PptScan(_) => ppt_scan_cmd(&settings),
        Command::Supermodes(_) => supermodes_cmd(&settings),
        Command::DualRail(_) => dual_rail_cmd(&settings),
        Command::Lattice(_) => lattice_cmd(&settings),
        Command::TimeVarying(_) => time_varying_cmd(&settings),
        Command::Overlap(_) => overlap_cmd(&settings),
    }
}

pub fn ppt_scan_cmd(s: &Settings) -> Result<(), CliError> {
    s.format_among(Format::Csv, &[Format::Csv])?;
    let gamma = s.require_gamma()?;
    let thetas = theta_grid(s.grid_points);
    let scan = ppt_scan(&thetas, gamma).map_err(CliError::numerical)?;
    let mut csv = String::from("theta,bipartition,ppt_value\n");
    for (i, &theta) in scan.thetas().iter().enumerate() {
        for (j, bp) in scan.bipartitions().iter().enumerate() {
            csv.push_str(&fmt_sig(theta));
            csv.push(',');
            csv.push_str(&bp.label());
            csv.push(',');
            csv.push_str(&fmt_sig(scan.value(i, j)));
            csv.push('\n');
        }
    }
    export::write_output(s.out.as_deref(), &csv)
}

pub fn supermodes_cmd(s: &Settings) -> Result<(), CliError> {
    s.format_among(Format::Csv, &[Format::Csv])?;
    let gamma = s.require_gamma()?;
    let theta = s.require_theta1()?;
    let graph = quadripartite_g(theta);
    let state = CovarianceState::from_graph(&graph, gamma).map_err(CliError::numerical)?;
    let combos = quadripartite_squeezed_combinations(theta);

    let mut csv = String::from("eigenvalue,variance,residual");
    for mode in graph.modes() {
        csv.push_str(&format!(",q_{mode}"));
    }
    for mode in graph.modes() {
        csv.push_str(&format!(",p_{mode}"));
    }
    csv.push('\n');

    // Residual against the closed-form squeezed plane: distance to it for
    // squeezed rows, distance to its orthogonal complement otherwise.
    for sm in supermodes(&graph) {
        let variance = state.quadratic_form(&sm.coefficients).map_err(CliError::numerical)?;
        let mut projected = DVector::zeros(sm.coefficients.len());
        for combo in &combos {
            projected += combo * combo.dot(&sm.coefficients);
        }
        let residual = if sm.is_squeezed() {
            (&sm.coefficients - &projected).norm()
        } else {
            projected.norm()
        };
        csv.push_str(&fmt_sig(sm.eigenvalue));
        csv.push(',');
        csv.push_str(&fmt_sig(variance));
        csv.push(',');
        csv.push_str(&fmt_sig(residual));
        for x in sm.coefficients.iter() {
            csv.push(',');
            csv.push_str(&fmt_sig(*x));
        }
        csv.push('\n');
    }
    export::write_output(s.out.as_deref(), &csv)
}

fn wire_skip_text(reason: SkipReason) -> &'static str {
    match reason {
        SkipReason::PartnerOutsideWindow => "a pump partner falls outside the window",
        SkipReason::SelfPaired => "the frequency pairs with itself under a pump line",
    }
}

fn lattice_skip_text(reason: LatticeSkipReason) -> &'static str {
    match reason {
        LatticeSkipReason::PartnerOutsideWindow => "a pump partner falls outside the window",
        LatticeSkipReason::SelfPaired => "the frequency pairs with itself under a pump line",
        LatticeSkipReason::GeneratorOutsideBins => "the previous bin is outside the simulated range",
        LatticeSkipReason::ReferenceOutsideBins => "a referenced bin is outside the simulated range",
    }
}

pub fn dual_rail_cmd(s: &Settings) -> Result<(), CliError> {
    let format = s.format_among(Format::Json, &[Format::Json, Format::Dot])?;
    let theta1 = s.require_theta1()?;
    let theta2 = s.require_theta2()?;
    let pump = s.static_pump()?;
    let set = dual_rail_nullifiers(&pump, s.window).map_err(CliError::numerical)?;
    for skip in &set.skipped {
        eprintln!("warning: n={}: {}", skip.freq, wire_skip_text(skip.reason));
    }
    if set.forms.is_empty() {
        eprintln!("warning: no nullifier fits the window; the graph is empty");
    }
    let graph = graph_from_nullifiers(&set.forms).map_err(CliError::numerical)?;
    let weights = edge_weights(theta1, theta2);
    let file = export::wire_graph_file(&graph, &weights, s.p1, s.p2);
    let content = match format {
        Format::Json => export::to_json(&file),
        Format::Dot => export::to_dot(&file),
        Format::Csv => unreachable!("format checked above"),
    };
    export::write_output(s.out.as_deref(), &content)
}

pub fn lattice_cmd(s: &Settings) -> Result<(), CliError> {
    let format = s.format_among(Format::Json, &[Format::Json, Format::Dot])?;
    if !s.schedule.is_empty() {
        return Err(CliError::config("schedule", "static lattice takes no schedule; use time-varying"));
    }
    let pump = s.static_pump()?;
    let lat = lattice_2d(&pump, s.window, s.bins).map_err(CliError::numerical)?;
    emit_lattice(s, format, &lat)
}

pub fn time_varying_cmd(s: &Settings) -> Result<(), CliError> {
    let format = s.format_among(Format::Json, &[Format::Json, Format::Dot])?;
    let pump = s.scheduled_pump()?;
    let lat = time_varying_lattice(&pump, s.window, s.bins).map_err(CliError::numerical)?;
    emit_lattice(s, format, &lat)
}

fn emit_lattice(s: &Settings, format: Format, lat: &Lattice) -> Result<(), CliError> {
    for skip in &lat.skipped {
        eprintln!("warning: n={} k={}: {}", skip.freq, skip.bin, lattice_skip_text(skip.reason));
    }
    if lat.macronodes.is_empty() {
        eprintln!("warning: no macronode fits the ranges; the lattice is empty");
    }
    let file = export::lattice_graph_file(lat, s.p1, s.p2);
    let content = match format {
        Format::Json => export::to_json(&file),
        Format::Dot => export::to_dot(&file),
        Format::Csv => unreachable!("format checked above"),
    };
    export::write_output(s.out.as_deref(), &content)
}

pub fn overlap_cmd(s: &Settings) -> Result<(), CliError> {
    s.format_among(Format::Csv, &[Format::Csv])?;
    let pumps = [HGIndex::new(2, 0), HGIndex::new(1, 1), HGIndex::new(0, 2)];
    let pairs = [
        (Spatial::H, Spatial::H),
        (Spatial::H, Spatial::V),
        (Spatial::V, Spatial::V),
    ];
    // parity_allowed is the exact selection rule (overlap is nonzero iff
    // both summed axis orders are even); selected marks the stricter
    // order-conserving channels that drive the comb.
    let mut csv = String::from("pump,signal,idler,overlap,parity_allowed,selected\n");
    for pump in pumps {
        for (signal, idler) in pairs {
            let value =
                overlap_integral(pump, signal.hg(), idler.hg()).map_err(CliError::numerical)?;
            let parity = (pump.m + signal.hg().m + idler.hg().m) % 2 == 0
                && (pump.n + signal.hg().n + idler.hg().n) % 2 == 0;
            let selected = conserves_orders(pump, signal.hg(), idler.hg());
            csv.push_str(&format!(
                "{pump},{signal},{idler},{},{parity},{selected}\n",
                fmt_sig(value)
            ));
        }
    }
    export::write_output(s.out.as_deref(), &csv)
}
