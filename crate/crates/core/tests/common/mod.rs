//! Synthetic decompiled app trees with injected contrast defects.
//!
//! Each fixture is a minimal apktool-style tree plus the matching detection
//! report, UI dumps and screenshots, and the exact outcome the pipeline is
//! expected to produce for it. Together they span every localization route:
//! direct attribute, color-resource chain, style item, bounds→text, smali
//! constant, raster/vector drawables, shared-resource minting, EditText
//! filtering, and the designed-unrepairable failures.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use contrast_mend_core::color::Srgb8;
use contrast_mend_core::localizer::TargetKind;
use contrast_mend_core::pipeline::{SkipReason, UnrepairedReason};
use contrast_mend_core::refdb::{ColorPairRecord, RecordSource, ReferenceDb};
use contrast_mend_core::report::{parse_issue_report, Bounds, ParsedReport, UiNode};
use contrast_mend_core::selector::SelectionStrategy;
use image::{Rgba, RgbaImage};

// Palette (contrast ratios vs the named background, WCAG oracle):
//   ISSUE_RED    #C06060 on white  4.13   medium saturation, hue 0
//   CAND_RED_A   #8B3A3A on white  7.60   medium, hue 0
//   CAND_RED_B   #963C3C on white  6.98   medium, hue 0
//   ISSUE_BLUE   #6495ED on white  2.97   medium, hue 218
//   CAND_BLUE    #2C4673 on white  9.41   medium, hue 218
//   ISSUE_GREEN  #81C784 on white  2.01   medium, hue 123
//   CAND_GREEN   #2E7D32 on white  5.13   medium, hue 123
//   ISSUE_PURPLE #B38AD6 on white  2.79   medium, hue 272
//   CAND_PURPLE  #664285 on white  7.83   medium, hue 272
//   ISSUE_GRAY   #9E9E9E on white  2.68   neutral
//   GLYPH        #B0BEC5 on #ECEFF1 1.65  low sat, hue 200
//   CAND_SLATE   #455A64 on #ECEFF1 6.27  low sat, hue 199
//   TEAL         #298670 on #EDF064 3.64  high sat, hue 166
//   CAND_TEAL    #125949 on #EDF064 6.76  high sat, hue 166
pub const ISSUE_RED: &str = "#C06060";
pub const ISSUE_BLUE: &str = "#6495ED";
pub const ISSUE_GREEN: &str = "#81C784";
pub const ISSUE_PURPLE: &str = "#B38AD6";
pub const ISSUE_GRAY: &str = "#9E9E9E";
pub const GLYPH: &str = "#B0BEC5";
pub const ICON_BG: &str = "#ECEFF1";
pub const TEAL: &str = "#298670";
pub const YELLOW: &str = "#EDF064";

pub fn srgb(hex: &str) -> Srgb8 {
    Srgb8::parse_hex(hex).unwrap()
}

/// Reference DB shared by most fixtures: pairs "mined" from a donor app.
pub fn donor_db() -> ReferenceDb {
    let mut db = ReferenceDb::new();
    let mut add = |ty: &str, fg: &str, bg: &str| {
        let accepted = db.ingest_record(ColorPairRecord {
            app_id: "donor.app".into(),
            component_type: ty.into(),
            fg: srgb(fg),
            bg: srgb(bg),
            source: RecordSource::ReportColors,
        });
        assert!(accepted, "donor pair {fg}/{bg} must meet admission contrast");
    };
    add("TextView", "#8B3A3A", "#FFFFFF");
    add("TextView", "#963C3C", "#FFFFFF");
    add("TextView", "#2C4673", "#FFFFFF");
    add("TextView", "#664285", "#FFFFFF");
    add("TextView", "#125949", "#EDF064");
    add("Button", "#2E7D32", "#FFFFFF");
    add("ImageButton", "#455A64", "#ECEFF1");
    add("ImageButton", "#37474F", "#ECEFF1");
    add("ImageView", "#455A64", "#ECEFF1");
    db
}

#[derive(Debug, Clone, Default)]
pub struct Expect {
    pub patches: usize,
    pub repaired_issues: usize,
    pub unrepaired: Vec<UnrepairedReason>,
    pub skipped: Vec<SkipReason>,
    pub already_satisfied: usize,
    pub strategy: Option<SelectionStrategy>,
    pub kinds: Vec<TargetKind>,
}

pub struct Fixture {
    pub name: &'static str,
    pub root: PathBuf,
    pub report: ParsedReport,
    pub dumps: BTreeMap<String, UiNode>,
    pub screenshots: BTreeMap<String, RgbaImage>,
    pub db: ReferenceDb,
    pub expect: Expect,
}

fn write(root: &Path, rel: &str, content: &str) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, content).unwrap();
}

fn layout(children: &str) -> String {
    format!(
        "<LinearLayout xmlns:android=\"http://schemas.android.com/apk/res/android\"\n    \
         android:background=\"#FFFFFF\">\n{children}\n</LinearLayout>\n"
    )
}

fn report_of(issues: &[serde_json::Value]) -> ParsedReport {
    let doc = serde_json::json!({
        "schema": "contrast-issue-report/1",
        "app_id": "com.fixture.app",
        "issues": issues,
    });
    let parsed = parse_issue_report(&doc.to_string()).unwrap();
    assert!(parsed.warnings.is_empty(), "fixture reports must be valid");
    parsed
}

fn text_issue(fg: &str, bg: &str, id: Option<&str>, bounds: Option<&str>) -> serde_json::Value {
    let mut v = serde_json::json!({
        "kind": "text_contrast",
        "activity": "Main",
        "fg": fg,
        "bg": bg,
    });
    if let Some(id) = id {
        v["resource_id"] = serde_json::json!(format!("com.fixture.app:id/{id}"));
    }
    if let Some(b) = bounds {
        v["bounds"] = serde_json::json!(b);
    }
    v
}

fn image_issue(fg: &str, bg: &str, id: Option<&str>, bounds: Option<&str>) -> serde_json::Value {
    let mut v = text_issue(fg, bg, id, bounds);
    v["kind"] = serde_json::json!("image_contrast");
    v
}

fn leaf(class: &str, id: Option<&str>, text: Option<&str>, bounds: Bounds, clickable: bool) -> UiNode {
    UiNode {
        class_name: format!("android.widget.{class}"),
        resource_id: id.map(|i| format!("com.fixture.app:id/{i}")),
        text: text.map(str::to_string),
        bounds,
        clickable,
        children: vec![],
    }
}

fn dump_root(children: Vec<UiNode>) -> UiNode {
    UiNode {
        class_name: "android.widget.FrameLayout".into(),
        resource_id: None,
        text: None,
        bounds: Bounds::new(0, 0, 1080, 1920),
        clickable: false,
        children,
    }
}

/// 24×24 icon: solid glyph block on transparency, plus anti-aliased edges.
pub fn glyph_icon(glyph: Srgb8) -> RgbaImage {
    let mut img = RgbaImage::from_pixel(24, 24, Rgba([0, 0, 0, 0]));
    for y in 6..18 {
        for x in 6..18 {
            img.put_pixel(x, y, Rgba([glyph.r, glyph.g, glyph.b, 255]));
        }
    }
    // near-glyph halo: within the match tolerance, partially blended on repair
    for x in 6..18 {
        img.put_pixel(x, 5, Rgba([glyph.r - 8, glyph.g - 8, glyph.b - 8, 128]));
    }
    img
}

fn save_png(root: &Path, rel: &str, img: &RgbaImage) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    img.save_with_format(&path, image::ImageFormat::Png).unwrap();
}

fn save_webp(root: &Path, rel: &str, img: &RgbaImage) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    let f = fs::File::create(&path).unwrap();
    let enc = image::codecs::webp::WebPEncoder::new_lossless(std::io::BufWriter::new(f));
    enc.encode(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgba8)
        .unwrap();
}

type Builder = fn(&Path) -> Fixture;

pub fn all_fixtures(parent: &Path) -> Vec<Fixture> {
    let builders: Vec<(&str, Builder)> = vec![
        ("direct_attr", direct_attr),
        ("color_chain", color_chain),
        ("style_item", style_item),
        ("bounds_text_literal", bounds_text_literal),
        ("bounds_text_string_ref", bounds_text_string_ref),
        ("smali_const", smali_const),
        ("raster_icon", raster_icon),
        ("vector_icon", vector_icon),
        ("shared_mint", shared_mint),
        ("edittext_skip", edittext_skip),
        ("idless_image", idless_image),
        ("ornamental_image", ornamental_image),
        ("ambiguous_text", ambiguous_text),
        ("swap_corrected", swap_corrected),
        ("webp_icon", webp_icon),
        ("jpeg_icon", jpeg_icon),
        ("multi_density", multi_density),
        ("cross_page_shared_id", cross_page_shared_id),
        ("neutral_gray", neutral_gray),
        ("chromatic_fallback", chromatic_fallback),
        ("link_and_title_attrs", link_and_title_attrs),
        ("dangling_reference", dangling_reference),
        ("already_satisfied", already_satisfied),
    ];
    builders
        .into_iter()
        .map(|(name, b)| {
            let root = parent.join(name);
            fs::create_dir_all(&root).unwrap();
            let f = b(&root);
            assert_eq!(f.name, name);
            f
        })
        .collect()
}

fn direct_attr(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:id=\"@+id/title\" android:textColor=\"{ISSUE_RED}\" android:text=\"Hello\"/>"
        )),
    );
    Fixture {
        name: "direct_attr",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", Some("title"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn color_chain(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <TextView android:id=\"@+id/subtitle\" android:textColor=\"@color/link_blue\" android:text=\"More\"/>",
        ),
    );
    write(
        root,
        "res/values/colors.xml",
        &format!(
            "<resources>\n    <color name=\"link_blue\">@color/blue_base</color>\n    \
             <color name=\"blue_base\">{ISSUE_BLUE}</color>\n</resources>\n"
        ),
    );
    Fixture {
        name: "color_chain",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_BLUE, "#FFFFFF", Some("subtitle"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::ColorResource],
            ..Default::default()
        },
    }
}

fn style_item(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout("    <Button android:id=\"@+id/go\" style=\"@style/Leafy\" android:text=\"Go\"/>"),
    );
    write(
        root,
        "res/values/styles.xml",
        &format!(
            "<resources>\n    <style name=\"Leafy\">\n        \
             <item name=\"android:textColor\">{ISSUE_GREEN}</item>\n    </style>\n</resources>\n"
        ),
    );
    Fixture {
        name: "style_item",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_GREEN, "#FFFFFF", Some("go"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::StyleItem],
            ..Default::default()
        },
    }
}

fn bounds_text_literal(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:textColor=\"{ISSUE_RED}\" android:text=\"Continue\"/>"
        )),
    );
    let node = leaf("TextView", None, Some("Continue"), Bounds::new(0, 100, 400, 160), false);
    Fixture {
        name: "bounds_text_literal",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", None, Some("[0,100][400,160]"))]),
        dumps: BTreeMap::from([("Main".to_string(), dump_root(vec![node]))]),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn bounds_text_string_ref(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:textColor=\"{ISSUE_RED}\" android:text=\"@string/cta\"/>"
        )),
    );
    write(
        root,
        "res/values/strings.xml",
        "<resources>\n    <string name=\"cta\">Sign up now</string>\n</resources>\n",
    );
    let node = leaf("TextView", None, Some("Sign up now"), Bounds::new(0, 100, 400, 160), false);
    Fixture {
        name: "bounds_text_string_ref",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", None, Some("[0,100][400,160]"))]),
        dumps: BTreeMap::from([("Main".to_string(), dump_root(vec![node]))]),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn smali_const(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        "<LinearLayout xmlns:android=\"http://schemas.android.com/apk/res/android\"\n    \
         android:background=\"#F5F5F5\">\n    \
         <TextView android:id=\"@+id/status\" android:text=\"Ready\"/>\n</LinearLayout>\n",
    );
    write(
        root,
        "res/values/public.xml",
        "<resources>\n    <public type=\"id\" name=\"status\" id=\"0x7f090001\" />\n</resources>\n",
    );
    write(
        root,
        "smali/com/fixture/app/MainActivity.smali",
        ".class public Lcom/fixture/app/MainActivity;\n.super Landroid/app/Activity;\n\n\
         .method protected onCreate(Landroid/os/Bundle;)V\n    .locals 3\n\n    \
         const v0, 0x7f090001\n\n    \
         invoke-virtual {p0, v0}, Lcom/fixture/app/MainActivity;->findViewById(I)Landroid/view/View;\n\n    \
         move-result-object v1\n\n    \
         check-cast v1, Landroid/widget/TextView;\n\n    \
         const v2, -0x1\n\n    \
         invoke-virtual {v1, v2}, Landroid/widget/TextView;->setTextColor(I)V\n\n    \
         return-void\n.end method\n",
    );
    Fixture {
        name: "smali_const",
        root: root.to_path_buf(),
        report: report_of(&[text_issue("#FFFFFF", "#F5F5F5", Some("status"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ComplementaryNeutral),
            kinds: vec![TargetKind::SmaliConst],
            ..Default::default()
        },
    }
}

fn raster_icon(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <ImageButton android:id=\"@+id/share\" android:src=\"@drawable/ic_share\"/>",
        ),
    );
    save_png(root, "res/drawable/ic_share.png", &glyph_icon(srgb(GLYPH)));
    Fixture {
        name: "raster_icon",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, Some("share"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::DrawableFile],
            ..Default::default()
        },
    }
}

fn vector_icon(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <ImageView android:id=\"@+id/add\" android:onClick=\"onAdd\" android:src=\"@drawable/ic_add\"/>",
        ),
    );
    write(
        root,
        "res/drawable/ic_add.xml",
        &format!(
            "<vector xmlns:android=\"http://schemas.android.com/apk/res/android\"\n    \
             android:width=\"24dp\" android:height=\"24dp\"\n    \
             android:viewportWidth=\"24\" android:viewportHeight=\"24\">\n    \
             <path android:fillColor=\"#FF{}\" android:pathData=\"M11,5h2v14h-2z\"/>\n    \
             <path android:fillColor=\"#FF{}\" android:pathData=\"M5,11h14v2H5z\"/>\n</vector>\n",
            &GLYPH[1..],
            &GLYPH[1..]
        ),
    );
    Fixture {
        name: "vector_icon",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, Some("add"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::DrawableFile],
            ..Default::default()
        },
    }
}

fn shared_mint(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <TextView android:id=\"@+id/title\" android:textColor=\"@color/shared_text\" android:text=\"A\"/>\n    \
             <TextView android:id=\"@+id/footer\" android:textColor=\"@color/shared_text\" android:text=\"B\"/>",
        ),
    );
    write(
        root,
        "res/values/colors.xml",
        &format!(
            "<resources>\n    <color name=\"shared_text\">{ISSUE_RED}</color>\n</resources>\n"
        ),
    );
    Fixture {
        name: "shared_mint",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", Some("title"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 2,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute, TargetKind::ColorResource],
            ..Default::default()
        },
    }
}

fn edittext_skip(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <EditText android:id=\"@+id/entry\" android:textColor=\"#BBBBBB\" android:hint=\"Name\"/>",
        ),
    );
    Fixture {
        name: "edittext_skip",
        root: root.to_path_buf(),
        report: report_of(&[text_issue("#BBBBBB", "#FFFFFF", Some("entry"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            skipped: vec![SkipReason::EditTextFiltered],
            ..Default::default()
        },
    }
}

fn idless_image(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout("    <ImageView android:src=\"@drawable/decor\"/>"),
    );
    save_png(root, "res/drawable/decor.png", &glyph_icon(srgb(GLYPH)));
    // the dump node carries neither text nor resource-id
    let node = leaf("ImageView", None, None, Bounds::new(10, 10, 60, 60), true);
    Fixture {
        name: "idless_image",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, None, Some("[10,10][60,60]"))]),
        dumps: BTreeMap::from([("Main".to_string(), dump_root(vec![node]))]),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            unrepaired: vec![UnrepairedReason::NoText],
            ..Default::default()
        },
    }
}

fn ornamental_image(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <ImageView android:id=\"@+id/hero\" android:src=\"@drawable/hero\"/>",
        ),
    );
    save_png(root, "res/drawable/hero.png", &glyph_icon(srgb(GLYPH)));
    Fixture {
        name: "ornamental_image",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, Some("hero"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            unrepaired: vec![UnrepairedReason::OrnamentalImage],
            ..Default::default()
        },
    }
}

fn ambiguous_text(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:textColor=\"{ISSUE_RED}\" android:text=\"OK\"/>\n    \
             <Button android:textColor=\"{ISSUE_RED}\" android:text=\"OK\"/>"
        )),
    );
    let node = leaf("TextView", None, Some("OK"), Bounds::new(0, 100, 200, 150), false);
    Fixture {
        name: "ambiguous_text",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", None, Some("[0,100][200,150]"))]),
        dumps: BTreeMap::from([("Main".to_string(), dump_root(vec![node]))]),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            unrepaired: vec![UnrepairedReason::AmbiguousText],
            ..Default::default()
        },
    }
}

fn swap_corrected(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &format!(
            "<LinearLayout xmlns:android=\"http://schemas.android.com/apk/res/android\"\n    \
             android:background=\"{YELLOW}\">\n    \
             <TextView android:id=\"@+id/promo\" android:textColor=\"{TEAL}\" android:text=\"Deal\"/>\n</LinearLayout>\n"
        ),
    );
    // page crop: mostly yellow background with a band of teal text pixels
    let yellow = srgb(YELLOW);
    let teal = srgb(TEAL);
    let mut shot = RgbaImage::from_pixel(200, 80, Rgba([yellow.r, yellow.g, yellow.b, 255]));
    for y in 30..42 {
        for x in 20..160 {
            shot.put_pixel(x, y, Rgba([teal.r, teal.g, teal.b, 255]));
        }
    }
    // the report has foreground and background reversed
    let mut issue = text_issue(YELLOW, TEAL, Some("promo"), Some("[0,0][200,80]"));
    issue["screenshot"] = serde_json::json!("screens/Main.png");
    Fixture {
        name: "swap_corrected",
        root: root.to_path_buf(),
        report: report_of(&[issue]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::from([("Main".to_string(), shot)]),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn webp_icon(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <ImageButton android:id=\"@+id/save\" android:src=\"@drawable/ic_save\"/>",
        ),
    );
    save_webp(root, "res/drawable/ic_save.webp", &glyph_icon(srgb(GLYPH)));
    Fixture {
        name: "webp_icon",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, Some("save"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::DrawableFile],
            ..Default::default()
        },
    }
}

fn jpeg_icon(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <ImageButton android:id=\"@+id/photo\" android:src=\"@drawable/ic_photo\"/>",
        ),
    );
    // opaque glyph on an opaque backdrop; jpeg has no alpha channel
    let glyph = srgb(GLYPH);
    let backdrop = srgb(ICON_BG);
    let mut img = RgbaImage::from_pixel(24, 24, Rgba([backdrop.r, backdrop.g, backdrop.b, 255]));
    for y in 6..18 {
        for x in 6..18 {
            img.put_pixel(x, y, Rgba([glyph.r, glyph.g, glyph.b, 255]));
        }
    }
    let path = root.join("res/drawable/ic_photo.jpg");
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    let f = fs::File::create(&path).unwrap();
    let mut enc = image::codecs::jpeg::JpegEncoder::new_with_quality(std::io::BufWriter::new(f), 95);
    enc.encode_image(&image::DynamicImage::ImageRgba8(img).to_rgb8())
        .unwrap();
    Fixture {
        name: "jpeg_icon",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, Some("photo"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::DrawableFile],
            ..Default::default()
        },
    }
}

fn multi_density(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <ImageButton android:id=\"@+id/undo\" android:src=\"@drawable/ic_undo\"/>",
        ),
    );
    save_png(root, "res/drawable-mdpi/ic_undo.png", &glyph_icon(srgb(GLYPH)));
    save_png(root, "res/drawable-xhdpi/ic_undo.png", &glyph_icon(srgb(GLYPH)));
    Fixture {
        name: "multi_density",
        root: root.to_path_buf(),
        report: report_of(&[image_issue(GLYPH, ICON_BG, Some("undo"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 2,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::DrawableFile, TargetKind::DrawableFile],
            ..Default::default()
        },
    }
}

fn cross_page_shared_id(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:id=\"@+id/header\" android:textColor=\"{ISSUE_RED}\" android:text=\"H\"/>"
        )),
    );
    // the same component appears on two pages: one property, one edit
    let mut second = text_issue(ISSUE_RED, "#FFFFFF", Some("header"), None);
    second["activity"] = serde_json::json!("Detail");
    Fixture {
        name: "cross_page_shared_id",
        root: root.to_path_buf(),
        report: report_of(&[
            text_issue(ISSUE_RED, "#FFFFFF", Some("header"), None),
            second,
        ]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 2,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn neutral_gray(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:id=\"@+id/meta\" android:textColor=\"{ISSUE_GRAY}\" android:text=\"meta\"/>"
        )),
    );
    Fixture {
        name: "neutral_gray",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_GRAY, "#FFFFFF", Some("meta"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ComplementaryNeutral),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn chromatic_fallback(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:id=\"@+id/warn\" android:textColor=\"{ISSUE_RED}\" android:text=\"warn\"/>"
        )),
    );
    Fixture {
        name: "chromatic_fallback",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", Some("warn"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        // nothing to borrow from: forces the direct-adjustment branch
        db: ReferenceDb::new(),
        expect: Expect {
            patches: 1,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ComplementaryChromatic),
            kinds: vec![TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn link_and_title_attrs(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(&format!(
            "    <TextView android:id=\"@+id/legal\" android:textColor=\"{ISSUE_PURPLE}\" \
             android:textColorLink=\"{ISSUE_PURPLE}\" android:text=\"Terms\"/>"
        )),
    );
    Fixture {
        name: "link_and_title_attrs",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_PURPLE, "#FFFFFF", Some("legal"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            patches: 2,
            repaired_issues: 1,
            strategy: Some(SelectionStrategy::ReferenceDb),
            kinds: vec![TargetKind::XmlAttribute, TargetKind::XmlAttribute],
            ..Default::default()
        },
    }
}

fn dangling_reference(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <TextView android:id=\"@+id/ghost\" android:textColor=\"@color/missing\" android:text=\"?\"/>",
        ),
    );
    Fixture {
        name: "dangling_reference",
        root: root.to_path_buf(),
        report: report_of(&[text_issue(ISSUE_RED, "#FFFFFF", Some("ghost"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            unrepaired: vec![UnrepairedReason::DanglingReference],
            ..Default::default()
        },
    }
}

fn already_satisfied(root: &Path) -> Fixture {
    write(
        root,
        "res/layout/main.xml",
        &layout(
            "    <TextView android:id=\"@+id/fine\" android:textColor=\"#2E7D32\" android:text=\"ok\"/>",
        ),
    );
    // detector false positive: the color already meets 4.5:1 on white
    Fixture {
        name: "already_satisfied",
        root: root.to_path_buf(),
        report: report_of(&[text_issue("#2E7D32", "#FFFFFF", Some("fine"), None)]),
        dumps: BTreeMap::new(),
        screenshots: BTreeMap::new(),
        db: donor_db(),
        expect: Expect {
            already_satisfied: 1,
            repaired_issues: 1,
            ..Default::default()
        },
    }
}

/// A larger app for the performance and determinism checks: `layouts` layout
/// files, each with an id-addressed defective TextView, and `issues` issues
/// spread across them.
pub fn bulk_app(root: &Path, layouts: usize, issues: usize) -> (ParsedReport, ReferenceDb) {
    for i in 0..layouts {
        write(
            root,
            &format!("res/layout/screen_{i:02}.xml"),
            &layout(&format!(
                "    <TextView android:id=\"@+id/item_{i:02}\" android:textColor=\"{ISSUE_RED}\" android:text=\"Row {i}\"/>\n    \
                 <TextView android:id=\"@+id/meta_{i:02}\" android:textColor=\"#555555\" android:text=\"sub\"/>"
            )),
        );
    }
    let issue_values: Vec<serde_json::Value> = (0..issues)
        .map(|i| {
            let mut v = text_issue(
                ISSUE_RED,
                "#FFFFFF",
                Some(&format!("item_{:02}", i % layouts)),
                None,
            );
            v["activity"] = serde_json::json!(format!("Screen{:02}", i % layouts));
            v
        })
        .collect();
    (report_of(&issue_values), donor_db())
}
