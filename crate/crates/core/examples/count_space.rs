//! Size of the dynamics and document spaces for every preset.

use rtfm::nlgen::TemplatePack;
use rtfm::worldgen::{count_space, load_catalog, Preset, Task};

pub fn run_example() -> rtfm::Result<()> {
    let catalog = load_catalog();
    let pack = TemplatePack::standard();
    for preset in Preset::ALL {
        let config = preset.config();
        if config.task != Task::Rtfm {
            continue;
        }
        let c = count_space(&catalog, &config, pack.sizes());
        println!(
            "{:<7} dynamics {:>12} documents {:>22}",
            preset.name(),
            c.dynamics,
            c.documents
        );
    }
    let mut nl_only = Preset::Base6.config();
    nl_only.nl = true;
    let c = count_space(&catalog, &nl_only, pack.sizes());
    println!("base6+nl documents {:.3e}", c.documents as f64);
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
