//! Issue tagged shares, reconstruct, split into subshares, and run the
//! exhaustive hiding check over a small field.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rational_sharing::field::Field;
use rational_sharing::shamir::{hiding_check, Issuer};

fn main() -> rational_sharing::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let field = Field::new(101)?;
    let issuer = Issuer::random(field, &mut rng);
    let secret = field.element(42)?;

    let shares = issuer.issue_shares(secret, 3, 5, 0, &mut rng)?;
    for s in &shares {
        println!("holder {} x={} y={:>3} tag={}...", s.holder, s.x, s.y, &s.tag.to_hex()[..12]);
    }
    let back = issuer.reconstruct(&shares[1..4], 3)?;
    println!("reconstructed from holders 2..4: {}", back.value());

    let mut forged = shares[0];
    forged.y = forged.y + field.one();
    println!("forged share verifies: {}", issuer.verify_tag(&forged));

    let subs = issuer.split_subshares(&shares[0], 4, &mut rng)?;
    let joined = issuer.join_subshares(&subs).expect("complete set");
    println!("4 subshares of holder 1 rejoin to y={}", joined.y);

    let small = Field::new(7)?;
    for row in hiding_check(small, 3, 5)? {
        println!(
            "GF(7) 3-of-5: coalitions of size {} ({} checked) uniform: {}",
            row.subset_size, row.subsets_checked, row.uniform
        );
    }
    Ok(())
}
