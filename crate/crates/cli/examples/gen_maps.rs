//! Regenerates the sampled-map fixtures used by the CLI tests:
//! `cargo run -p qhgeo-cli --example gen_maps`.

use qhgeo::maps::ray_exit;
use qhgeo::{Domain, DomainSpec, Point, SampledMap};
use std::path::Path;

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let disk = Domain::new(DomainSpec::disk(Point::new(0.5, 0.5), 1.0))?;
    let comb = Domain::new(DomainSpec::comb(5))?;

    let id = SampledMap::from_fn(&disk, &disk, |p| p, Some, 60, 64, 1, "disk_identity")?;

    // Affine squash of the disk into the unit square; boundary points go to
    // the first comb boundary hit along the ray from a fixed interior point.
    let c = Point::new(0.75, 0.5);
    let squash = |p: Point| Point::new((p.x + 0.5) / 2.0, (p.y + 0.5) / 2.0);
    let to_comb = SampledMap::from_fn(
        &disk,
        &comb,
        squash,
        |p| ray_exit(&comb, &c, &(p - Point::new(0.5, 0.5))),
        60,
        64,
        1,
        "disk_to_comb5",
    )?;

    for (name, map) in [
        ("disk_identity.map.json", &id),
        ("disk_to_comb5.map.json", &to_comb),
    ] {
        let mut text = serde_json::to_string_pretty(map)?;
        text.push('\n');
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}
