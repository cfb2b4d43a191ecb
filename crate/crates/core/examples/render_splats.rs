//! Renders a handful of Gaussians at each SH degree and checks one gradient
//! against a finite difference.
//!
//! cargo run --release --example render_splats -- [out.png]

use nalgebra::Vector3;
use splat_avatar::error::Result;
use splat_avatar::image_io::ImageBuffer;
use splat_avatar::splat::sh::rgb_to_dc;
use splat_avatar::splat::{logit, render, Camera, GaussianSet, SH_COEFFS};

fn scene() -> GaussianSet {
    let mut g = GaussianSet::default();
    let colors = [[0.9, 0.2, 0.2], [0.2, 0.8, 0.3], [0.2, 0.3, 0.9]];
    for (k, rgb) in colors.iter().enumerate() {
        let mut sh = [[0.0; 3]; SH_COEFFS];
        sh[0] = rgb.map(rgb_to_dc);
        // a little view dependence on the first-degree band
        sh[2] = [0.3, -0.2, 0.1];
        let x = -0.3 + 0.3 * k as f64;
        g.push(Vector3::new(x, 0.05 * k as f64, 2.0 + 0.2 * k as f64), 0.12f64.ln(), sh, logit(0.8));
    }
    g
}

fn main() -> Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "splats.png".into());
    let cam = Camera::identity(96, 64, 80.0);
    let g = scene();
    for degree in 0..=3 {
        let img = render(&g, &cam, degree).image;
        let mean: f64 = img.data.iter().sum::<f64>() / img.data.len() as f64;
        println!("sh degree {degree}: mean intensity {mean:.5}");
    }
    let r = render(&g, &cam, 3);
    r.image.save_png(&out)?;
    println!("wrote {out}");

    // d(sum of red channel)/d(x position of the first splat), analytic vs numeric
    let mut grad_image = ImageBuffer::new(cam.width, cam.height);
    for px in grad_image.data.chunks_mut(3) {
        px[0] = 1.0;
    }
    let analytic = r.backward(&g, &cam, &grad_image).positions[0].x;
    let red = |g: &GaussianSet| render(g, &cam, 3).image.data.chunks(3).map(|p| p[0]).sum::<f64>();
    let h = 1e-5;
    let (mut a, mut b) = (g.clone(), g.clone());
    a.positions[0].x += h;
    b.positions[0].x -= h;
    let numeric = (red(&a) - red(&b)) / (2.0 * h);
    println!("dL/dx: analytic {analytic:.6}, numeric {numeric:.6}");
    Ok(())
}
