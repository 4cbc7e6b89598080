//! Angular-spectrum propagation of the built-in target to the sensor and back.
//!
//! cargo run --release --example propagation

use cdpsr::field::SamplingGeometry;
use cdpsr::propagation::{propagate, propagate_padded, OpticalConfig};
use cdpsr::targets::builtin_target;

fn main() -> cdpsr::Result<()> {
    let geom = SamplingGeometry::from_detector(2, 1.4)?;
    let optics = OpticalConfig::new(0.532, 21_550.0, geom)?;
    let u = builtin_target(128, 128, geom.hr_pitch())?;

    let at_sensor = propagate(&u, &optics)?;
    let back = propagate(&at_sensor, &optics.with_distance(-optics.distance))?;
    println!("energy in       {:.6}", u.energy());
    println!("energy at z     {:.6}", at_sensor.energy());
    println!("round trip err  {:.3e}", u.max_abs_diff(&back)?);

    // Zero padding suppresses wrap-around from the periodic FFT.
    let padded = propagate_padded(&u, &optics)?;
    println!("padded energy   {:.6}", padded.energy());
    let amp = at_sensor.amplitude();
    println!("sensor amplitude range [{:.3}, {:.3}]", amp.min(), amp.max());
    Ok(())
}
