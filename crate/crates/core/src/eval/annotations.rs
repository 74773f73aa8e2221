//! Line-delimited patch annotations.
//!
//! One record per line: `image,category,xmin,ymin,xmax,ymax`, pixel units,
//! min inclusive and max exclusive. Blank lines and lines starting with `#`
//! are skipped. Relative image paths resolve against the annotation file's
//! directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::patches::Patch;
use crate::imageio::{crop, load_pgm};
use crate::{BBox, Error, GrayImage, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub image: PathBuf,
    pub category: String,
    pub bbox: BBox,
    /// 1-based line number in the source text.
    pub line: usize,
}

fn annotation_err(line: usize, message: impl Into<String>) -> Error {
    Error::Annotation {
        line,
        message: message.into(),
    }
}

pub fn parse_annotations(text: &str, base_dir: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut records = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(annotation_err(line, format!("expected 6 fields, found {}", fields.len())));
        }
        if fields[0].is_empty() {
            return Err(annotation_err(line, "empty image path"));
        }
        if fields[1].is_empty() {
            return Err(annotation_err(line, "empty category"));
        }
        let mut coords = [0usize; 4];
        for (c, f) in coords.iter_mut().zip(&fields[2..]) {
            *c = f
                .parse()
                .map_err(|_| annotation_err(line, format!("invalid coordinate {f:?}")))?;
        }
        let [xmin, ymin, xmax, ymax] = coords;
        if xmin >= xmax || ymin >= ymax {
            return Err(annotation_err(line, format!("empty box {xmin},{ymin},{xmax},{ymax}")));
        }
        let path = Path::new(fields[0]);
        let image = if path.is_absolute() {
            path.to_path_buf()
        } else {
            base_dir.join(path)
        };
        records.push(AnnotationRecord {
            image,
            category: fields[1].to_string(),
            bbox: BBox::new(xmin, ymin, xmax, ymax),
            line,
        });
    }
    Ok(records)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_annotations(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Crops every record's patch. Each image file is decoded once.
pub fn load_corpus(records: &[AnnotationRecord]) -> Result<Vec<Patch>> {
    let mut cache: HashMap<&Path, GrayImage> = HashMap::new();
    let mut patches = Vec::with_capacity(records.len());
    for r in records {
        if !cache.contains_key(r.image.as_path()) {
            let img = load_pgm(&r.image)
                .map_err(|e| annotation_err(r.line, format!("cannot load {}: {e}", r.image.display())))?;
            cache.insert(r.image.as_path(), img);
        }
        let img = &cache[r.image.as_path()];
        let image = crop(img, r.bbox).map_err(|e| annotation_err(r.line, e.to_string()))?;
        patches.push(Patch {
            category: r.category.clone(),
            image,
        });
    }
    Ok(patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::save_pgm;

    #[test]
    fn parses_records_and_skips_comments() {
        let text = "# header\n\nscene.pgm, cat, 1, 2, 5, 7\n/abs/x.pgm,dog,0,0,3,3\n";
        let r = parse_annotations(text, Path::new("/data")).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].image, PathBuf::from("/data/scene.pgm"));
        assert_eq!(r[0].category, "cat");
        assert_eq!(r[0].bbox, BBox::new(1, 2, 5, 7));
        assert_eq!(r[0].line, 3);
        assert_eq!(r[1].image, PathBuf::from("/abs/x.pgm"));
    }

    #[test]
    fn malformed_lines_report_their_number() {
        for (text, line) in [
            ("a.pgm,c,0,0,1\n", 1),
            ("# ok\na.pgm,c,0,0,x,1\n", 2),
            ("a.pgm,c,0,0,2,2\na.pgm,c,3,0,3,2\n", 2),
            (",c,0,0,1,1\n", 1),
            ("a.pgm,,0,0,1,1\n", 1),
        ] {
            match parse_annotations(text, Path::new(".")) {
                Err(Error::Annotation { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn loads_and_crops() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(10, 8, |x, y| (10 * y + x) as u8).unwrap();
        save_pgm(&img, dir.path().join("s.pgm")).unwrap();
        std::fs::write(dir.path().join("ann.txt"), "s.pgm,a,2,1,5,4\ns.pgm,b,0,0,10,8\n").unwrap();
        let records = load_annotations(dir.path().join("ann.txt")).unwrap();
        let corpus = load_corpus(&records).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!((corpus[0].image.width(), corpus[0].image.height()), (3, 3));
        assert_eq!(corpus[0].image.get(0, 0), 12);
        assert_eq!(corpus[1].image, img);
    }

    #[test]
    fn unresolvable_image_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::filled(4, 4, 0).unwrap();
        save_pgm(&img, dir.path().join("s.pgm")).unwrap();
        let records = parse_annotations("s.pgm,a,0,0,2,2\nmissing.pgm,a,0,0,2,2\n", dir.path()).unwrap();
        assert!(matches!(load_corpus(&records), Err(Error::Annotation { line: 2, .. })));
        let records = parse_annotations("s.pgm,a,0,0,5,2\n", dir.path()).unwrap();
        assert!(matches!(load_corpus(&records), Err(Error::Annotation { line: 1, .. })));
    }
}
