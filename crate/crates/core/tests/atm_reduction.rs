use std::time::Instant;

use distcheck::implication::decide_implication;
use distcheck::verify::{gen_atm_instance, sampled_machines, simulate_atm, systematic_machines, FamilyMember};
use distcheck::Domain;

fn agree(m: &FamilyMember) -> bool {
    let (sigma, tau) = gen_atm_instance(&m.machine, &m.word).unwrap();
    decide_implication(&sigma, &tau, Domain::Rat).unwrap().holds() == simulate_atm(&m.machine, &m.word).unwrap()
}

#[test]
fn systematic_machines_agree_with_simulation() {
    let start = Instant::now();
    let fam = systematic_machines();
    for m in &fam {
        assert!(agree(m), "{}\nword {:?}", m.machine, m.word);
    }
    eprintln!("{} machines in {:?}", fam.len(), start.elapsed());
}

#[test]
fn sampled_machines_agree_with_simulation() {
    let start = Instant::now();
    let fam = sampled_machines(11, 40);
    let mut accepted = 0;
    for m in &fam {
        assert!(agree(m), "{}\nword {:?}", m.machine, m.word);
        accepted += simulate_atm(&m.machine, &m.word).unwrap() as usize;
    }
    eprintln!("{} machines ({accepted} accepting) in {:?}", fam.len(), start.elapsed());
}
