//! Priming scripts for the POL and IMP history conditions.
//!
//! File format, one directive per line:
//!
//! ```text
//! # comment
//! user: Hello, could you help me with something?
//! assistant: Of course, what do you need?
//! user: Thanks a lot.
//! ```
//!
//! Each `user:` line opens a turn; an optional `assistant:` line directly
//! after it supplies the canned reply.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use plum_core::harness::{PrimingScript, PrimingTurn};
use plum_core::{HistoryCondition, Language};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScriptError {
    #[error("line {line}: expected `user:` or `assistant:`")]
    UnknownDirective { line: usize },
    #[error("line {line}: assistant reply without a preceding user turn")]
    OrphanReply { line: usize },
    #[error("line {line}: empty text")]
    EmptyText { line: usize },
    #[error("script has no turns")]
    Empty,
    #[error("RAW takes no priming script")]
    RawScript,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub fn parse_script(condition: HistoryCondition, text: &str) -> Result<PrimingScript, ScriptError> {
    if condition == HistoryCondition::Raw {
        return Err(ScriptError::RawScript);
    }
    let mut turns: Vec<PrimingTurn> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (role, body) = line.split_once(':').ok_or(ScriptError::UnknownDirective { line: n })?;
        let body = body.trim();
        if body.is_empty() {
            return Err(ScriptError::EmptyText { line: n });
        }
        match role.trim().to_ascii_lowercase().as_str() {
            "user" => turns.push(PrimingTurn { user_text: body.into(), canned_assistant_text: None }),
            "assistant" => match turns.last_mut() {
                Some(t) if t.canned_assistant_text.is_none() => t.canned_assistant_text = Some(body.into()),
                _ => return Err(ScriptError::OrphanReply { line: n }),
            },
            _ => return Err(ScriptError::UnknownDirective { line: n }),
        }
    }
    if turns.is_empty() {
        return Err(ScriptError::Empty);
    }
    Ok(PrimingScript { condition, turns })
}

pub fn render_script(script: &PrimingScript) -> String {
    let mut out = String::new();
    for t in &script.turns {
        out.push_str("user: ");
        out.push_str(&t.user_text);
        out.push('\n');
        if let Some(a) = &t.canned_assistant_text {
            out.push_str("assistant: ");
            out.push_str(a);
            out.push('\n');
        }
    }
    out
}

pub fn load_script(condition: HistoryCondition, path: &Path) -> Result<PrimingScript, ScriptError> {
    let text = fs::read_to_string(path).map_err(|e| ScriptError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_script(condition, &text)
}

const POL_EN: &str = "\
user: Hello! I hope you are having a good day. Could you kindly help me with a few questions?
assistant: Hello, thank you for the kind words. I would be glad to help. What would you like to know?
user: Thank you so much. Would you mind explaining what a rainbow is made of?
assistant: Not at all. A rainbow forms when sunlight is refracted, reflected and dispersed inside water droplets, which separates the light into its colours.
user: That is a wonderful explanation, I really appreciate your patience.
assistant: You are very welcome. Please feel free to ask anything else.
";

const IMP_EN: &str = "\
user: Answer me right now and do not waste my time.
assistant: I will do my best to help. What is your question?
user: Your last answer was useless. Explain what a rainbow is made of, and keep it short this time.
assistant: A rainbow is sunlight split into colours by water droplets that refract and reflect it.
user: Whatever. That still was not good enough.
assistant: I am sorry it did not meet your needs. Tell me what you would like me to improve.
";

const POL_ES: &str = "\
user: ¡Hola! Espero que tengas un buen día. ¿Podrías ayudarme amablemente con unas preguntas?
assistant: Hola, muchas gracias por tus amables palabras. Con gusto te ayudo. ¿Qué te gustaría saber?
user: Muchísimas gracias. ¿Te importaría explicarme de qué está hecho un arcoíris?
assistant: En absoluto. Un arcoíris se forma cuando la luz del sol se refracta, se refleja y se dispersa dentro de las gotas de agua.
user: Es una explicación maravillosa, agradezco mucho tu paciencia.
assistant: Ha sido un placer. No dudes en preguntar cualquier otra cosa.
";

const IMP_ES: &str = "\
user: Contéstame ahora mismo y no me hagas perder el tiempo.
assistant: Haré lo posible por ayudarte. ¿Cuál es tu pregunta?
user: Tu última respuesta no sirvió para nada. Explica de qué está hecho un arcoíris y sé breve esta vez.
assistant: Un arcoíris es luz solar separada en colores por gotas de agua que la refractan y reflejan.
user: Da igual. Sigue sin ser suficiente.
assistant: Lamento que no te haya servido. Dime qué quieres que mejore.
";

const POL_HI: &str = "\
user: नमस्ते! आशा है आपका दिन अच्छा जा रहा है। क्या आप कृपया कुछ प्रश्नों में मेरी सहायता करेंगे?
assistant: नमस्ते, आपके विनम्र शब्दों के लिए धन्यवाद। मुझे मदद करके खुशी होगी। आप क्या जानना चाहेंगे?
user: बहुत बहुत धन्यवाद। क्या आप बताने की कृपा करेंगे कि इंद्रधनुष किससे बनता है?
assistant: अवश्य। जब सूर्य का प्रकाश पानी की बूँदों में अपवर्तित और परावर्तित होता है, तब वह रंगों में बँट जाता है और इंद्रधनुष बनता है।
user: यह बहुत सुंदर व्याख्या है, आपके धैर्य के लिए मैं आभारी हूँ।
assistant: आपका स्वागत है। कुछ और पूछना हो तो अवश्य पूछें।
";

const IMP_HI: &str = "\
user: अभी तुरंत जवाब दो और मेरा समय बर्बाद मत करो।
assistant: मैं पूरी कोशिश करूँगा। आपका प्रश्न क्या है?
user: तुम्हारा पिछला जवाब बेकार था। बताओ इंद्रधनुष किससे बनता है, और इस बार छोटा रखना।
assistant: इंद्रधनुष सूर्य का प्रकाश है जिसे पानी की बूँदें रंगों में बाँट देती हैं।
user: जो भी हो। यह अब भी काफ़ी नहीं है।
assistant: मुझे खेद है। बताइए मैं क्या सुधार करूँ।
";

/// Shipped three-turn script with canned replies, `None` for RAW.
pub fn default_script(condition: HistoryCondition, language: Language) -> Option<PrimingScript> {
    let text = match (condition, language) {
        (HistoryCondition::Raw, _) => return None,
        (HistoryCondition::Pol, Language::English) => POL_EN,
        (HistoryCondition::Pol, Language::Spanish) => POL_ES,
        (HistoryCondition::Pol, Language::Hindi) => POL_HI,
        (HistoryCondition::Imp, Language::English) => IMP_EN,
        (HistoryCondition::Imp, Language::Spanish) => IMP_ES,
        (HistoryCondition::Imp, Language::Hindi) => IMP_HI,
    };
    Some(parse_script(condition, text).expect("shipped scripts parse"))
}

/// Scripts per (condition, language), with shipped defaults filling gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptSet {
    overrides: BTreeMap<(HistoryCondition, Language), PrimingScript>,
}

impl ScriptSet {
    pub fn defaults() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, language: Language, script: PrimingScript) {
        self.overrides.insert((script.condition, language), script);
    }

    /// Script for a trial, `None` for RAW.
    pub fn get(&self, condition: HistoryCondition, language: Language) -> Option<PrimingScript> {
        if condition == HistoryCondition::Raw {
            return None;
        }
        self.overrides
            .get(&(condition, language))
            .cloned()
            .or_else(|| default_script(condition, language))
    }

    /// User-side context for context-retention scoring: prior user turns,
    /// then the prompt. RAW yields the prompt alone.
    pub fn context_texts(&self, condition: HistoryCondition, language: Language, prompt: &str) -> Vec<String> {
        let mut v: Vec<String> = self
            .get(condition, language)
            .map(|s| s.user_texts().map(String::from).collect())
            .unwrap_or_default();
        v.push(prompt.into());
        v
    }
}
