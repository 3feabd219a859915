use ncmukai::refine::{classify, Status};
use ncmukai::report::Convergence;

#[test]
fn classification() {
    assert_eq!(classify(Convergence::Exact, 1e-3, 1e-3), (None, Status::Exact));
    assert_eq!(classify(Convergence::H2, 4e-4, 1e-4), (Some(4.0), Status::Ok));
    assert_eq!(classify(Convergence::H2, 5.9e-4, 1e-4).1, Status::Ok);
    assert_eq!(classify(Convergence::H2, 6.1e-4, 1e-4).1, Status::Flagged);
    assert_eq!(classify(Convergence::H2, 1.9e-4, 1e-4).1, Status::Flagged);
    assert_eq!(classify(Convergence::H2, 1e-16, 3e-16), (None, Status::Noise));
    assert_eq!(classify(Convergence::Spectral, 1e-6, 1e-9).1, Status::Spectral);
}
