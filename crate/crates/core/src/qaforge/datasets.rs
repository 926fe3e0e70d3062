//! Label-file adapters.
//!
//! | dataset | file | questions per item |
//! |---|---|---|
//! | `agedb` | CSV `image,age,gender`, or one filename per line as `<id>_<name>_<age>_<m\|f>.jpg` | 2 (age, gender) |
//! | `utkface` | one filename per line as `<age>_<gender 0=male 1=female>_<race>_<date>.jpg` | 2 (age, gender) |
//! | `rafdb` | `<image> <label 1..=7>` per line | 1 (expression) |
//! | `affectnet` | CSV with an image column and `expression` 0..=7; 8..=10 are skipped | 1 (expression) |
//! | `emotionet` | CSV with an image column and one column per AU (`AU1`..`AU43`), values 1, 0 or 999 (unknown, skipped) | 12 (AUs) |
//! | `lfwa`, `celeba` | optional count line, a header of the 40 attribute names, then `<image> v1 .. v40` with 1 or -1; whitespace or comma separated | 40 (attributes) |
//! | `biwi` | CSV with an image column and `yaw` in degrees | 1 (head pose) |
//!
//! Every item yields exactly its questions-per-item count of pairs minus
//! the skips reported for it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::labels::{face_attribute, FaceAttribute, AFFECTNET_CLASSES, EMOTIONET_AUS, RAFDB_CLASSES};
use super::reformulate::{
    reformulate_age, reformulate_attribute, reformulate_au, reformulate_expression,
    reformulate_gender, reformulate_head_pose,
};
use super::ForgeError;
use crate::schema::{FaceImageRef, QAPair, Record, SourceDataset, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Agedb,
    Utkface,
    Rafdb,
    Affectnet,
    Emotionet,
    Lfwa,
    Celeba,
    Biwi,
}

impl Dataset {
    pub const ALL: [Dataset; 8] = [
        Dataset::Agedb,
        Dataset::Utkface,
        Dataset::Rafdb,
        Dataset::Affectnet,
        Dataset::Emotionet,
        Dataset::Lfwa,
        Dataset::Celeba,
        Dataset::Biwi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Agedb => "agedb",
            Dataset::Utkface => "utkface",
            Dataset::Rafdb => "rafdb",
            Dataset::Affectnet => "affectnet",
            Dataset::Emotionet => "emotionet",
            Dataset::Lfwa => "lfwa",
            Dataset::Celeba => "celeba",
            Dataset::Biwi => "biwi",
        }
    }

    pub fn source(self) -> SourceDataset {
        match self {
            Dataset::Agedb => SourceDataset::Agedb,
            Dataset::Utkface => SourceDataset::Utkface,
            Dataset::Rafdb => SourceDataset::Rafdb,
            Dataset::Affectnet => SourceDataset::Affectnet,
            Dataset::Emotionet => SourceDataset::Emotionet,
            Dataset::Lfwa => SourceDataset::Lfwa,
            Dataset::Celeba => SourceDataset::Celeba,
            Dataset::Biwi => SourceDataset::Biwi,
        }
    }

    pub fn questions_per_item(self) -> usize {
        match self {
            Dataset::Agedb | Dataset::Utkface => 2,
            Dataset::Rafdb | Dataset::Affectnet | Dataset::Biwi => 1,
            Dataset::Emotionet => EMOTIONET_AUS.len(),
            Dataset::Lfwa | Dataset::Celeba => 40,
        }
    }

    /// Templates without a published example.
    pub fn has_reference_template(self) -> bool {
        !matches!(self, Dataset::Utkface | Dataset::Biwi)
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase().replace(['-', '_'], "");
        Dataset::ALL
            .into_iter()
            .find(|d| d.name() == key)
            .ok_or_else(|| format!("unknown dataset {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct AdapterOptions {
    /// Prefix joined to image file names to form URIs.
    pub image_root: String,
    pub seed: u64,
    pub shuffle_options: bool,
    pub describe_attributes: bool,
}

impl Default for AdapterOptions {
    fn default() -> Self {
        Self {
            image_root: String::new(),
            seed: 0,
            shuffle_options: true,
            describe_attributes: true,
        }
    }
}

/// A question not generated for an item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSkip {
    pub dataset: Dataset,
    pub line: usize,
    pub image: String,
    pub question: String,
    pub reason: String,
}

impl Record for DatasetSkip {
    const KIND: &'static str = "dataset_skip";
    const FIELDS: &'static [&'static str] = &["dataset", "line", "image", "question", "reason"];

    fn validate(&self) -> Result<(), Violation> {
        if self.reason.trim().is_empty() {
            return Err(Violation::new("reason", "must be non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReformulateOutput {
    pub items: usize,
    pub pairs: Vec<QAPair>,
    pub skips: Vec<DatasetSkip>,
}

struct Sink<'a> {
    dataset: Dataset,
    opts: &'a AdapterOptions,
    out: ReformulateOutput,
}

impl Sink<'_> {
    fn image(&self, file: &str) -> FaceImageRef {
        let uri = if self.opts.image_root.is_empty() {
            file.to_string()
        } else {
            format!("{}/{file}", self.opts.image_root.trim_end_matches('/'))
        };
        FaceImageRef::new(format!("{}/{file}", self.dataset), uri, self.dataset.source())
    }

    fn push(&mut self, line: usize, image: &FaceImageRef, question: &str, result: Result<QAPair, ForgeError>) {
        match result {
            Ok(qa) => self.out.pairs.push(qa),
            Err(e) => self.skip(line, image, question, e.to_string()),
        }
    }

    fn skip(&mut self, line: usize, image: &FaceImageRef, question: &str, reason: String) {
        self.out.skips.push(DatasetSkip {
            dataset: self.dataset,
            line,
            image: image.id.clone(),
            question: question.to_string(),
            reason,
        });
    }
}

fn label_err(line: usize, message: impl Into<String>) -> ForgeError {
    ForgeError::Label {
        line,
        message: message.into(),
    }
}

/// Rewrite a dataset's label file as questions.
pub fn reformulate_dataset(
    dataset: Dataset,
    labels: &str,
    opts: &AdapterOptions,
) -> Result<ReformulateOutput, ForgeError> {
    let mut sink = Sink {
        dataset,
        opts,
        out: ReformulateOutput::default(),
    };
    match dataset {
        Dataset::Agedb => agedb(labels, &mut sink)?,
        Dataset::Utkface => utkface(labels, &mut sink)?,
        Dataset::Rafdb => rafdb(labels, &mut sink)?,
        Dataset::Affectnet => affectnet(labels, &mut sink)?,
        Dataset::Emotionet => emotionet(labels, &mut sink)?,
        Dataset::Lfwa | Dataset::Celeba => attribute_matrix(labels, &mut sink)?,
        Dataset::Biwi => biwi(labels, &mut sink)?,
    }
    Ok(sink.out)
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn column(&self, names: &[&str]) -> Option<usize> {
        self.headers
            .iter()
            .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
    }

    fn require(&self, names: &[&str]) -> Result<usize, ForgeError> {
        self.column(names)
            .ok_or_else(|| label_err(1, format!("missing column {:?}", names[0])))
    }
}

fn read_csv(text: &str) -> Result<Table, ForgeError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| label_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            label_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table { headers, rows })
}

const IMAGE_COLUMNS: [&str; 5] = ["image", "file", "filename", "subDirectory_filePath", "image_id"];

fn age_and_gender(sink: &mut Sink<'_>, line: usize, file: &str, age: &str, gender: &str) {
    let image = sink.image(file);
    sink.out.items += 1;
    let age = match age.trim().parse::<f64>() {
        Ok(a) if a.fract() == 0.0 => reformulate_age(&image, a as i64),
        _ => Err(label_err(line, format!("age {age:?} is not an integer"))),
    };
    sink.push(line, &image, "age", age);
    let qa = reformulate_gender(&image, gender, sink.opts.seed);
    sink.push(line, &image, "gender", qa);
}

fn stem(file: &str) -> &str {
    let name = file.rsplit('/').next().unwrap_or(file);
    name.split('.').next().unwrap_or(name)
}

fn agedb(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    let first = lines(text).next().map(|(_, l)| l).unwrap_or("");
    if first.contains(',') {
        let t = read_csv(text)?;
        let (img, age, gender) = (
            t.require(&IMAGE_COLUMNS)?,
            t.require(&["age"])?,
            t.require(&["gender", "sex"])?,
        );
        for (line, row) in &t.rows {
            age_and_gender(sink, *line, &row[img], &row[age], &row[gender]);
        }
        return Ok(());
    }
    for (line, file) in lines(text) {
        let parts: Vec<&str> = stem(file).split('_').collect();
        if parts.len() < 4 {
            return Err(label_err(line, format!("{file:?} is not <id>_<name>_<age>_<gender>")));
        }
        let n = parts.len();
        age_and_gender(sink, line, file, parts[n - 2], parts[n - 1]);
    }
    Ok(())
}

fn utkface(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    for (line, file) in lines(text) {
        let parts: Vec<&str> = stem(file).split('_').collect();
        if parts.len() < 3 {
            return Err(label_err(line, format!("{file:?} is not <age>_<gender>_<race>_<date>")));
        }
        let gender = match parts[1] {
            "0" => "male",
            "1" => "female",
            other => other,
        };
        age_and_gender(sink, line, file, parts[0], gender);
    }
    Ok(())
}

fn expression(sink: &mut Sink<'_>, line: usize, file: &str, class: Option<&str>, classes: &[&str], raw: &str) {
    let image = sink.image(file);
    sink.out.items += 1;
    let seed = sink.opts.shuffle_options.then_some(sink.opts.seed);
    match class {
        Some(c) => {
            let qa = reformulate_expression(&image, c, classes, seed);
            sink.push(line, &image, "expression", qa);
        }
        None => sink.skip(line, &image, "expression", format!("label {raw} is not an expression")),
    }
}

fn rafdb(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    for (line, l) in lines(text) {
        let mut it = l.split_whitespace();
        let (Some(file), Some(label), None) = (it.next(), it.next(), it.next()) else {
            return Err(label_err(line, "expected <image> <label>"));
        };
        let class = match label.parse::<usize>() {
            Ok(n @ 1..=7) => RAFDB_CLASSES[n - 1],
            _ => return Err(label_err(line, format!("label {label:?} outside 1..=7"))),
        };
        expression(sink, line, file, Some(class), &RAFDB_CLASSES, label);
    }
    Ok(())
}

fn affectnet(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    let t = read_csv(text)?;
    let img = t.require(&IMAGE_COLUMNS)?;
    let expr = t.require(&["expression", "label"])?;
    for (line, row) in &t.rows {
        let raw = row[expr].as_str();
        let class = match raw.parse::<usize>() {
            Ok(n @ 0..=7) => Some(AFFECTNET_CLASSES[n]),
            Ok(8..=10) => None,
            _ => return Err(label_err(*line, format!("expression {raw:?} outside 0..=10"))),
        };
        expression(sink, *line, &row[img], class, &AFFECTNET_CLASSES, raw);
    }
    Ok(())
}

fn emotionet(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    let t = read_csv(text)?;
    let img = t.require(&IMAGE_COLUMNS)?;
    let mut columns = Vec::new();
    for au in &EMOTIONET_AUS {
        let bare = &au.code[2..];
        let spaced = format!("AU {bare}");
        let col = t
            .column(&[au.code, &spaced, bare])
            .ok_or_else(|| label_err(1, format!("missing column {:?}", au.code)))?;
        columns.push((au, col));
    }
    for (line, row) in &t.rows {
        let image = sink.image(&row[img]);
        sink.out.items += 1;
        for (au, col) in &columns {
            match row[*col].as_str() {
                "1" => {
                    let qa = reformulate_au(&image, au.code, au.description, true);
                    sink.push(*line, &image, au.code, qa)
                }
                "0" => {
                    let qa = reformulate_au(&image, au.code, au.description, false);
                    sink.push(*line, &image, au.code, qa)
                }
                "999" => sink.skip(*line, &image, au.code, "label 999 (unknown)".into()),
                other => return Err(label_err(*line, format!("{} value {other:?} is not 0, 1 or 999", au.code))),
            }
        }
    }
    Ok(())
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn attribute_matrix(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    let mut it = lines(text).peekable();
    if let Some((_, l)) = it.peek() {
        if l.parse::<usize>().is_ok() {
            it.next();
        }
    }
    let (hline, header) = it.next().ok_or_else(|| label_err(1, "missing attribute header"))?;
    let mut names = split_fields(header);
    if names.len() == 41 {
        names.remove(0);
    }
    let attrs: Vec<&FaceAttribute> = names
        .iter()
        .map(|n| face_attribute(n).ok_or_else(|| label_err(hline, format!("unknown attribute {n:?}"))))
        .collect::<Result<_, _>>()?;
    if attrs.len() != 40 {
        return Err(label_err(hline, format!("expected 40 attributes, found {}", attrs.len())));
    }
    for (line, l) in it {
        let fields = split_fields(l);
        if fields.len() != 41 {
            return Err(label_err(line, format!("expected image and 40 values, found {} fields", fields.len())));
        }
        let image = sink.image(fields[0]);
        sink.out.items += 1;
        for (attr, v) in attrs.iter().zip(&fields[1..]) {
            let present = match *v {
                "1" => true,
                "-1" | "0" => false,
                other => return Err(label_err(line, format!("{} value {other:?} is not 1 or -1", attr.key))),
            };
            let desc = sink.opts.describe_attributes.then_some(attr.description);
            let qa = reformulate_attribute(&image, attr.key, desc, present);
            sink.push(line, &image, attr.key, qa);
        }
    }
    Ok(())
}

fn biwi(text: &str, sink: &mut Sink<'_>) -> Result<(), ForgeError> {
    let t = read_csv(text)?;
    let img = t.require(&IMAGE_COLUMNS)?;
    let yaw = t.require(&["yaw"])?;
    for (line, row) in &t.rows {
        let value: f64 = row[yaw]
            .parse()
            .map_err(|_| label_err(*line, format!("yaw {:?} is not a number", row[yaw])))?;
        let image = sink.image(&row[img]);
        sink.out.items += 1;
        let qa = reformulate_head_pose(&image, value, sink.opts.seed);
        sink.push(*line, &image, "head_pose", qa);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{GoldLabel, TaskKind};

    fn run(d: Dataset, text: &str) -> ReformulateOutput {
        reformulate_dataset(d, text, &AdapterOptions { image_root: "data".into(), ..Default::default() }).unwrap()
    }

    fn assert_counts(out: &ReformulateOutput, d: Dataset) {
        assert_eq!(out.pairs.len() + out.skips.len(), out.items * d.questions_per_item());
    }

    #[test]
    fn agedb_both_forms() {
        let a = run(Dataset::Agedb, "image,age,gender\n0001.jpg,37,f\n0002.jpg,0,m\n");
        assert_counts(&a, Dataset::Agedb);
        assert_eq!(a.pairs[0].gold, GoldLabel::Number(37));
        assert_eq!(a.pairs[0].image.uri, "data/0001.jpg");
        assert_eq!(a.skips.len(), 1);
        assert_eq!(a.skips[0].line, 3);
        let b = run(Dataset::Agedb, "12_MariaCallas_37_f.jpg\n13_Some_Body_81_m.jpg\n");
        assert_counts(&b, Dataset::Agedb);
        assert_eq!(b.pairs[2].gold, GoldLabel::Number(81));
    }

    #[test]
    fn utkface_filenames() {
        let out = run(Dataset::Utkface, "25_1_0_20170116174525125.jpg.chip.jpg\n110_0_0_2017.jpg\n");
        assert_counts(&out, Dataset::Utkface);
        assert_eq!(out.skips.len(), 1);
        assert_eq!(out.skips[0].question, "age");
    }

    #[test]
    fn rafdb_labels() {
        let out = run(Dataset::Rafdb, "test_0001.jpg 4\ntest_0002.jpg 7\n");
        assert_eq!(out.pairs.len(), 2);
        for (qa, want) in out.pairs.iter().zip(["happiness", "neutral"]) {
            let GoldLabel::Letter(l) = qa.gold else { panic!() };
            assert_eq!(qa.option_text(l), Some(want));
        }
        assert!(reformulate_dataset(Dataset::Rafdb, "x.jpg 8\n", &AdapterOptions::default()).is_err());
    }

    #[test]
    fn affectnet_skips_non_emotions() {
        let out = run(Dataset::Affectnet, "subDirectory_filePath,expression\n1/a.jpg,1\n1/b.jpg,9\n");
        assert_counts(&out, Dataset::Affectnet);
        assert_eq!(out.pairs[0].options.as_ref().unwrap().len(), 8);
        assert_eq!(out.skips.len(), 1);
    }

    #[test]
    fn emotionet_columns_and_unknowns() {
        let header = "image,AU1,AU2,AU4,AU5,AU6,AU9,AU12,AU17,AU20,AU25,AU26,AU43";
        let out = run(Dataset::Emotionet, &format!("{header}\na.jpg,1,0,0,0,0,0,1,0,0,999,0,0\n"));
        assert_counts(&out, Dataset::Emotionet);
        assert_eq!(out.pairs.len(), 11);
        assert_eq!(out.pairs[0].gold, GoldLabel::Boolean(crate::schema::YesNo::Yes));
        assert!(out.pairs.iter().all(|p| p.aux_description.is_some()));
        let missing = reformulate_dataset(Dataset::Emotionet, "image,AU1\na.jpg,1\n", &AdapterOptions::default());
        assert!(matches!(missing, Err(ForgeError::Label { line: 1, .. })));
    }

    #[test]
    fn attribute_matrix_format() {
        let names: Vec<_> = crate::qaforge::labels::FACE_ATTRIBUTES.iter().map(|a| a.key).collect();
        let row = |f: &str, v: &str| format!("{f} {}", vec![v; 40].join(" "));
        let text = format!("2\n{}\n{}\n{}\n", names.join(" "), row("a.jpg", "1"), row("b.jpg", "-1"));
        let out = run(Dataset::Lfwa, &text);
        assert_eq!(out.pairs.len(), 80);
        assert!(out.pairs.iter().all(|p| p.task == TaskKind::YesNo && p.category == "attribute"));
        let short = format!("{}\na.jpg 1 1\n", names.join(" "));
        assert!(matches!(
            reformulate_dataset(Dataset::Celeba, &short, &AdapterOptions::default()),
            Err(ForgeError::Label { line: 2, .. })
        ));
    }

    #[test]
    fn biwi_head_pose() {
        let out = run(Dataset::Biwi, "image,yaw,pitch,roll\nf1.png,-30,0,0\nf2.png,2,1,1\n");
        assert_eq!(out.pairs.len(), 2);
        assert_eq!(out.pairs[0].category, "head_pose");
    }

    #[test]
    fn dataset_names_parse() {
        for d in Dataset::ALL {
            assert_eq!(d.name().parse::<Dataset>().unwrap(), d);
        }
        assert_eq!("RAF-DB".parse::<Dataset>().unwrap(), Dataset::Rafdb);
    }
}
