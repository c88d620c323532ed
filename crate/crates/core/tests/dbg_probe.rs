#[test]
fn dbg_probe() {
    use framewin_core::frames::*;
    use framewin_core::matrix::Mat;
    use framewin_core::morphism::kappa_morphism;
    use framewin_core::ring::*;
    use framewin_core::window::*;
    let eis = Eisenstein::new(3, 0, vec![(Monomial::u_power(1,1),1),(Monomial::one(1),3)]).unwrap();
    let b1 = breuil_frame(3, 3, &eis, 1, vec![]).unwrap();
    let fr1 = dieudonne_frame(&RingSpec::zmod(3, 1).unwrap(), 3).unwrap();
    let kappa = kappa_morphism(&b1, &fr1).unwrap();
    let one = Mat::identity(&b1.ring, 1).unwrap();
    let etale = Window::from_normal_decomposition(b1.clone(), 0, 1, one.clone()).unwrap();
    println!("spec = {}", b1.ring.series_spec().unwrap());
    println!("count capped = {:?}", b1.ring.series_spec().unwrap().element_count_capped(100000));
    println!("monomials = {:?}", b1.ring.series_spec().unwrap().monomials().len());
    let rep = framewin_core::ladder::faithfulness_probe(&kappa, &etale, &etale, 100000).unwrap();
    println!("{}", rep.render());
}
