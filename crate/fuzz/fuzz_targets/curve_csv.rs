#![no_main]

use libfuzzer_sys::fuzz_target;
use rdflb_cli::plot::render_svg;
use rdflb_cli::parse_curve_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        // Anything the parser accepts must plot and survive a round trip.
        if let Ok(t) = parse_curve_csv(s) {
            let _ = render_svg(&t);
            let again = parse_curve_csv(&t.to_csv()).expect("re-parse emitted CSV");
            assert_eq!(again.columns, t.columns);
            assert_eq!(again.rows.len(), t.rows.len());
        }
    }
});
