//! Label vocabularies of the classic face datasets.

/// RAF-DB basic expressions, in label order 1..=7.
pub const RAFDB_CLASSES: [&str; 7] = [
    "surprise",
    "fear",
    "disgust",
    "happiness",
    "sadness",
    "anger",
    "neutral",
];

/// AffectNet expressions, in label order 0..=7.
pub const AFFECTNET_CLASSES: [&str; 8] = [
    "neutral",
    "happiness",
    "sadness",
    "surprise",
    "fear",
    "disgust",
    "anger",
    "contempt",
];

pub struct ActionUnit {
    pub code: &'static str,
    pub name: &'static str,
    pub description: &'static str,
}

/// The twelve EmotioNet action units.
pub const EMOTIONET_AUS: [ActionUnit; 12] = [
    ActionUnit { code: "AU1", name: "Inner Brow Raiser", description: "Inner Brow Raiser is a facial expression that involves the upward movement of the inner part of the eyebrows." },
    ActionUnit { code: "AU2", name: "Outer Brow Raiser", description: "Outer Brow Raiser is a facial expression that involves the upward movement of the outer part of the eyebrows." },
    ActionUnit { code: "AU4", name: "Brow Lowerer", description: "Brow Lowerer is a facial expression that involves pulling the eyebrows down and together, often wrinkling the area between them." },
    ActionUnit { code: "AU5", name: "Upper Lid Raiser", description: "Upper Lid Raiser is a facial expression that involves raising the upper eyelids so that more of the eyeball is exposed." },
    ActionUnit { code: "AU6", name: "Cheek Raiser", description: "Cheek Raiser is a facial expression that involves lifting the cheeks, narrowing the eyes and forming crow's feet at their outer corners." },
    ActionUnit { code: "AU9", name: "Nose Wrinkler", description: "Nose Wrinkler is a facial expression that involves wrinkling the skin along the sides and bridge of the nose." },
    ActionUnit { code: "AU12", name: "Lip Corner Puller", description: "Lip Corner Puller is a facial expression that involves pulling the corners of the lips up and back, as in a smile." },
    ActionUnit { code: "AU17", name: "Chin Raiser", description: "Chin Raiser is a facial expression that involves pushing the chin boss and lower lip upward." },
    ActionUnit { code: "AU20", name: "Lip Stretcher", description: "Lip Stretcher is a facial expression that involves stretching the lips horizontally toward the sides of the face." },
    ActionUnit { code: "AU25", name: "Lips Part", description: "Lips Part is a facial expression that involves a slight separation of the lips." },
    ActionUnit { code: "AU26", name: "Jaw Drop", description: "Jaw Drop is a facial expression that involves the jaw dropping so that the mouth falls open." },
    ActionUnit { code: "AU43", name: "Eyes Closed", description: "Eyes Closed is a facial expression that involves the eyelids closing fully over the eyes." },
];

pub fn action_unit(name_or_code: &str) -> Option<&'static ActionUnit> {
    let key = name_or_code.trim();
    EMOTIONET_AUS
        .iter()
        .find(|au| au.code.eq_ignore_ascii_case(key) || au.name.eq_ignore_ascii_case(key))
}

pub struct FaceAttribute {
    /// Column name in the label files.
    pub key: &'static str,
    pub name: &'static str,
    pub description: &'static str,
}

macro_rules! fa {
    ($key:expr, $name:expr, $desc:expr) => {
        FaceAttribute { key: $key, name: $name, description: $desc }
    };
}

/// The forty binary attributes shared by CelebA and LFWA, in file order.
pub const FACE_ATTRIBUTES: [FaceAttribute; 40] = [
    fa!("5_o_Clock_Shadow", "5 O'Clock Shadow", "5 O'Clock Shadow is a light growth of beard stubble visible on the jaw and upper lip."),
    fa!("Arched_Eyebrows", "Arched Eyebrows", "Arched Eyebrows are eyebrows that rise to a clear peak before sloping down toward the temples."),
    fa!("Attractive", "Attractive", "Attractive describes a face generally perceived as pleasing to look at."),
    fa!("Bags_Under_Eyes", "Bags Under Eyes", "Bags Under Eyes are mild swelling or puffiness of the skin below the eyes."),
    fa!("Bald", "Bald", "Bald describes a scalp with little or no hair."),
    fa!("Bangs", "Bangs", "Bangs are strands of hair cut to fall over the forehead."),
    fa!("Big_Lips", "Big Lips", "Big Lips are noticeably full and large lips."),
    fa!("Big_Nose", "Big Nose", "Big Nose describes a nose that is large relative to the rest of the face."),
    fa!("Black_Hair", "Black Hair", "Black Hair is hair of a dark black color."),
    fa!("Blond_Hair", "Blond Hair", "Blond Hair is hair of a light yellow or golden color."),
    fa!("Blurry", "Blurry", "Blurry describes a face image that is out of focus or smeared by motion."),
    fa!("Brown_Hair", "Brown Hair", "Brown Hair is hair of a brown color."),
    fa!("Bushy_Eyebrows", "Bushy Eyebrows", "Bushy Eyebrows are thick, dense eyebrows with many hairs."),
    fa!("Chubby", "Chubby", "Chubby describes a plump, rounded face with full cheeks."),
    fa!("Double_Chin", "Double Chin", "Double Chin is a fold of fat that forms below the chin."),
    fa!("Eyeglasses", "Eyeglasses", "Eyeglasses are lenses in a frame worn in front of the eyes."),
    fa!("Goatee", "Goatee", "Goatee is a small beard on the chin, sometimes joined to a mustache."),
    fa!("Gray_Hair", "Gray Hair", "Gray Hair is hair that has turned gray or silver."),
    fa!("Heavy_Makeup", "Heavy Makeup", "Heavy Makeup is clearly visible cosmetics such as foundation, eye shadow and lipstick."),
    fa!("High_Cheekbones", "High Cheekbones", "High Cheekbones are cheekbones that sit high on the face and are clearly defined."),
    fa!("Male", "Male", "Male describes a person who appears to be a man."),
    fa!("Mouth_Slightly_Open", "Mouth Slightly Open", "Mouth Slightly Open describes lips that are a little apart, showing a gap."),
    fa!("Mustache", "Mustache", "Mustache is hair grown on the upper lip."),
    fa!("Narrow_Eyes", "Narrow Eyes", "Narrow Eyes are eyes with a small vertical opening."),
    fa!("No_Beard", "No Beard", "No Beard describes a face without any beard."),
    fa!("Oval_Face", "Oval Face", "Oval Face is a face longer than it is wide with a gently rounded jaw."),
    fa!("Pale_Skin", "Pale Skin", "Pale Skin is skin of a very light tone."),
    fa!("Pointy_Nose", "Pointy Nose", "Pointy Nose is a nose with a narrow, pointed tip."),
    fa!("Receding_Hairline", "Receding Hairline", "Receding Hairline is a hairline that has moved back from the forehead."),
    fa!("Rosy_Cheeks", "Rosy Cheeks", "Rosy Cheeks are cheeks with a pink or reddish tint."),
    fa!("Sideburns", "Sideburns", "Sideburns are strips of hair grown down the sides of the face in front of the ears."),
    fa!("Smiling", "Smiling", "Smiling describes a face with the corners of the mouth turned up in a smile."),
    fa!("Straight_Hair", "Straight Hair", "Straight Hair is hair that falls without curls or waves."),
    fa!("Wavy_Hair", "Wavy Hair", "Wavy Hair is hair with loose, wave-like curves."),
    fa!("Wearing_Earrings", "Wearing Earrings", "Wearing Earrings describes jewelry worn on the ear lobes."),
    fa!("Wearing_Hat", "Wearing Hat", "Wearing Hat describes a hat or cap worn on the head."),
    fa!("Wearing_Lipstick", "Wearing Lipstick", "Wearing Lipstick describes colored cosmetic applied to the lips."),
    fa!("Wearing_Necklace", "Wearing Necklace", "Wearing Necklace describes a chain or jewelry worn around the neck."),
    fa!("Wearing_Necktie", "Wearing Necktie", "Wearing Necktie describes a tie worn around the collar."),
    fa!("Young", "Young", "Young describes a person who appears to be young."),
];

pub fn face_attribute(key_or_name: &str) -> Option<&'static FaceAttribute> {
    let key = key_or_name.trim();
    FACE_ATTRIBUTES
        .iter()
        .find(|a| a.key.eq_ignore_ascii_case(key) || a.name.eq_ignore_ascii_case(key))
}
