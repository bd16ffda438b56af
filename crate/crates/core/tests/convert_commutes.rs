mod common;

use common::arb_document;
use docrec::convert::{extract_formulas, extract_tables, to_layout_records, to_markdown, to_plain_text};
use docrec::seqformat::{parse, serialize};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn text_views_survive_the_token_format(doc in arb_document()) {
        let back = parse(&serialize(&doc, 1000).unwrap(), doc.page_width, doc.page_height).unwrap();
        prop_assert_eq!(to_markdown(&back), to_markdown(&doc));
        prop_assert_eq!(to_plain_text(&back), to_plain_text(&doc));
        prop_assert_eq!(extract_tables(&back), extract_tables(&doc));
        prop_assert_eq!(extract_formulas(&back), extract_formulas(&doc));
    }

    #[test]
    fn layout_records_survive_up_to_one_bin(doc in arb_document()) {
        let back = parse(&serialize(&doc, 1000).unwrap(), doc.page_width, doc.page_height).unwrap();
        let (a, b) = (to_layout_records(&doc), to_layout_records(&back));
        prop_assert_eq!(a.len(), b.len());
        let (bw, bh) = (doc.page_width / 1000.0, doc.page_height / 1000.0);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.category, y.category);
            prop_assert!((x.bbox.x_min - y.bbox.x_min).abs() <= bw && (x.bbox.y_max - y.bbox.y_max).abs() <= bh);
        }
    }
}
