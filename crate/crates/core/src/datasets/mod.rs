//! Data ingestion and feature construction.

mod csv;
mod idx;
mod rff;

pub use self::csv::{load_csv, standardize, standardize_with_report, CsvDataset};
pub use self::idx::{
    load_idx, normalize_pixel, normalize_pixels, parse_idx_images, parse_idx_labels, write_idx, IdxImages,
    LabeledImages, IMAGES_MAGIC, LABELS_MAGIC, MNIST_FILES,
};
pub use self::rff::{rff_transform, sample_rff_matrix, RffConfig};
