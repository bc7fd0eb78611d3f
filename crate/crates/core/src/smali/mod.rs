//! Smali frontend: a typed register-machine IR for disassembled dex code.
//!
//! Classes are parsed one file at a time ([`parse_class`]) and assembled into a
//! [`SmaliProgram`] by [`load_program`]. Parameter registers (`pN`) are folded
//! into the ordinary register space at parse time, so `p0` of a method with
//! `.locals 3` is register 3.

mod loader;
mod parser;
mod printer;
pub mod types;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use loader::load_program;
pub use parser::{parse_class, parse_class_at};
pub use printer::print_class;

use crate::error::Diagnostic;

/// Register index in the normalized (locals + parameters) space.
pub type Reg = u16;

/// Android component kind derived from the class hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Activity,
    Service,
    Receiver,
    Provider,
    #[default]
    None,
}

impl ComponentKind {
    pub fn is_component(self) -> bool {
        self != ComponentKind::None
    }
}

/// A whole app: every class found under the `smali*/` trees.
#[derive(Debug, Clone, Default)]
pub struct SmaliProgram {
    pub classes: BTreeMap<String, ClassDef>,
    pub source_root: PathBuf,
    pub diagnostics: Vec<Diagnostic>,
}

/// Result of resolving a type descriptor against the program.
#[derive(Debug, Clone, Copy)]
pub enum TypeRef<'a> {
    Internal(&'a ClassDef),
    External,
}

impl SmaliProgram {
    pub fn from_classes(classes: impl IntoIterator<Item = ClassDef>) -> Self {
        let mut program = SmaliProgram::default();
        for class in classes {
            program.classes.insert(class.name.clone(), class);
        }
        program.classify_components();
        program
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.get(name)
    }

    pub fn resolve_type(&self, desc: &str) -> TypeRef<'_> {
        match self.classes.get(desc) {
            Some(c) => TypeRef::Internal(c),
            None => TypeRef::External,
        }
    }

    pub fn method(&self, key: &MethodKey) -> Option<&MethodDef> {
        self.classes.get(&key.class)?.method(&key.name, &key.descriptor)
    }

    pub fn methods(&self) -> impl Iterator<Item = (&ClassDef, &MethodDef)> {
        self.classes
            .values()
            .flat_map(|c| c.methods.iter().map(move |m| (c, m)))
    }

    pub fn instruction_count(&self) -> usize {
        self.methods().map(|(_, m)| m.instructions.len()).sum()
    }

    /// Superclass chain starting at `class` (inclusive), stopping when it
    /// leaves the program. The last external ancestor is included.
    pub fn superclass_chain(&self, class: &str) -> Vec<String> {
        let mut chain = vec![class.to_string()];
        let mut cur = class.to_string();
        while let Some(def) = self.classes.get(&cur) {
            match &def.superclass {
                Some(sup) if !chain.contains(sup) => {
                    chain.push(sup.clone());
                    cur = sup.clone();
                }
                _ => break,
            }
        }
        chain
    }

    /// All supertypes (classes and interfaces, transitively) including `class`.
    pub fn supertypes(&self, class: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut stack = vec![class.to_string()];
        while let Some(t) = stack.pop() {
            if out.contains(&t) {
                continue;
            }
            if let Some(def) = self.classes.get(&t) {
                if let Some(s) = &def.superclass {
                    stack.push(s.clone());
                }
                for i in def.interfaces.iter().rev() {
                    stack.push(i.clone());
                }
            }
            out.push(t);
        }
        out
    }

    pub fn is_subtype(&self, class: &str, ancestor: &str) -> bool {
        self.supertypes(class).iter().any(|t| t == ancestor)
    }

    /// Program classes that are `ty` or inherit from it.
    pub fn subtypes_of(&self, ty: &str) -> Vec<&ClassDef> {
        self.classes
            .values()
            .filter(|c| self.is_subtype(&c.name, ty))
            .collect()
    }

    /// Recomputes every class's [`ComponentKind`] from its superclass chain.
    pub fn classify_components(&mut self) {
        let kinds: Vec<(String, ComponentKind)> = self
            .classes
            .keys()
            .map(|k| (k.clone(), component_kind_of(&self.superclass_chain(k))))
            .collect();
        for (name, kind) in kinds {
            if let Some(c) = self.classes.get_mut(&name) {
                c.component = kind;
            }
        }
    }

    /// Looks up `name+descriptor` starting at `class` and walking superclasses.
    pub fn find_method_in_chain(&self, class: &str, name: &str, descriptor: &str) -> Option<MethodKey> {
        for c in self.superclass_chain(class) {
            if let Some(def) = self.classes.get(&c) {
                if let Some(m) = def.method(name, descriptor) {
                    return Some(MethodKey::new(&def.name, &m.name, &m.descriptor));
                }
            }
        }
        None
    }
}

const ACTIVITY_BASES: &[&str] = &[
    "Landroid/app/Activity;",
    "Landroid/app/ListActivity;",
    "Landroid/app/TabActivity;",
    "Landroid/preference/PreferenceActivity;",
    "Landroidx/activity/ComponentActivity;",
    "Landroidx/core/app/ComponentActivity;",
    "Landroidx/fragment/app/FragmentActivity;",
    "Landroidx/appcompat/app/AppCompatActivity;",
    "Landroid/support/v4/app/FragmentActivity;",
    "Landroid/support/v7/app/AppCompatActivity;",
    "Landroid/support/v7/app/ActionBarActivity;",
];
const SERVICE_BASES: &[&str] = &[
    "Landroid/app/Service;",
    "Landroid/app/IntentService;",
    "Landroidx/core/app/JobIntentService;",
    "Landroid/app/job/JobService;",
];
const RECEIVER_BASES: &[&str] = &["Landroid/content/BroadcastReceiver;"];
const PROVIDER_BASES: &[&str] = &["Landroid/content/ContentProvider;"];

fn component_kind_of(chain: &[String]) -> ComponentKind {
    for t in chain {
        let t = t.as_str();
        if ACTIVITY_BASES.contains(&t) {
            return ComponentKind::Activity;
        }
        if SERVICE_BASES.contains(&t) {
            return ComponentKind::Service;
        }
        if RECEIVER_BASES.contains(&t) {
            return ComponentKind::Receiver;
        }
        if PROVIDER_BASES.contains(&t) {
            return ComponentKind::Provider;
        }
    }
    ComponentKind::None
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: String,
    pub flags: Vec<String>,
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    pub source_file: Option<String>,
    pub fields: Vec<FieldDef>,
    pub methods: Vec<MethodDef>,
    pub component: ComponentKind,
    pub path: Option<PathBuf>,
}

impl ClassDef {
    pub fn method(&self, name: &str, descriptor: &str) -> Option<&MethodDef> {
        self.methods
            .iter()
            .find(|m| m.name == name && m.descriptor == descriptor)
    }

    pub fn methods_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a MethodDef> + 'a {
        self.methods.iter().filter(move |m| m.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn is_interface(&self) -> bool {
        self.flags.iter().any(|f| f == "interface")
    }

    pub fn is_abstract(&self) -> bool {
        self.flags.iter().any(|f| f == "abstract")
    }

    pub fn display_path(&self) -> String {
        self.path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| self.name.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    pub ty: String,
    pub flags: Vec<String>,
    pub initial: Option<Literal>,
}

impl FieldDef {
    pub fn is_static(&self) -> bool {
        self.flags.iter().any(|f| f == "static")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TryBlock {
    pub start: String,
    pub end: String,
    /// `None` for `.catchall`.
    pub exception: Option<String>,
    pub handler: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDef {
    pub name: String,
    /// `(params)ret`
    pub descriptor: String,
    pub flags: Vec<String>,
    pub register_count: u16,
    pub parameters: Vec<String>,
    pub return_type: String,
    pub instructions: Vec<Instruction>,
    pub labels: BTreeMap<String, usize>,
    pub try_blocks: Vec<TryBlock>,
    pub switch_payloads: BTreeMap<String, SwitchPayload>,
    pub array_payloads: BTreeMap<String, Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchPayload {
    pub packed: bool,
    /// (key, target label)
    pub targets: Vec<(i64, String)>,
}

impl MethodDef {
    pub fn is_static(&self) -> bool {
        self.flags.iter().any(|f| f == "static")
    }

    pub fn is_abstract(&self) -> bool {
        self.flags.iter().any(|f| f == "abstract" || f == "native")
    }

    pub fn is_constructor(&self) -> bool {
        self.name == "<init>" || self.name == "<clinit>"
    }

    /// Number of register words taken by parameters, including `this`.
    pub fn param_words(&self) -> u16 {
        let this = u16::from(!self.is_static());
        this + self
            .parameters
            .iter()
            .map(|p| types::word_size(p))
            .sum::<u16>()
    }

    /// First register of each parameter slot (slot 0 is `this` for instance methods).
    pub fn param_registers(&self) -> Vec<Reg> {
        let mut regs = Vec::new();
        let mut r = self.register_count.saturating_sub(self.param_words());
        if !self.is_static() {
            regs.push(r);
            r += 1;
        }
        for p in &self.parameters {
            regs.push(r);
            r += types::word_size(p);
        }
        regs
    }

    /// Types of each parameter slot, `this` first for instance methods.
    pub fn param_slot_types(&self, class: &str) -> Vec<String> {
        let mut v = Vec::new();
        if !self.is_static() {
            v.push(class.to_string());
        }
        v.extend(self.parameters.iter().cloned());
        v
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.get(label).copied()
    }
}

/// Identity of a method across the program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodKey {
    pub class: String,
    pub name: String,
    pub descriptor: String,
}

impl MethodKey {
    pub fn new(class: &str, name: &str, descriptor: &str) -> Self {
        MethodKey {
            class: class.to_string(),
            name: name.to_string(),
            descriptor: descriptor.to_string(),
        }
    }

    pub fn of(class: &ClassDef, method: &MethodDef) -> Self {
        Self::new(&class.name, &method.name, &method.descriptor)
    }

    /// Parses `Lcls;->name(desc)ret`.
    pub fn parse(s: &str) -> Option<Self> {
        let (class, rest) = s.split_once("->")?;
        let paren = rest.find('(')?;
        Some(Self::new(class, &rest[..paren], &rest[paren..]))
    }
}

impl fmt::Display for MethodKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}{}", self.class, self.name, self.descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldRef {
    pub class: String,
    pub name: String,
    pub ty: String,
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}:{}", self.class, self.name, self.ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodRef {
    pub class: String,
    pub name: String,
    pub parameters: Vec<String>,
    pub return_type: String,
}

impl MethodRef {
    pub fn descriptor(&self) -> String {
        format!("({}){}", self.parameters.concat(), self.return_type)
    }

    pub fn key(&self) -> MethodKey {
        MethodKey::new(&self.class, &self.name, &self.descriptor())
    }

    pub fn is(&self, class: &str, name: &str) -> bool {
        self.class == class && self.name == name
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}{}", self.class, self.name, self.descriptor())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
    /// Literal kept verbatim (floats, enums, arrays in field initializers).
    Raw(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvokeKind {
    Virtual,
    Super,
    Direct,
    Static,
    Interface,
}

impl InvokeKind {
    pub fn mnemonic(self) -> &'static str {
        match self {
            InvokeKind::Virtual => "invoke-virtual",
            InvokeKind::Super => "invoke-super",
            InvokeKind::Direct => "invoke-direct",
            InvokeKind::Static => "invoke-static",
            InvokeKind::Interface => "invoke-interface",
        }
    }
}

/// One decoded instruction. Operand arity is fixed by the variant.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Nop,
    Move { dst: Reg, src: Reg, wide: bool },
    MoveResult { dst: Reg, wide: bool },
    MoveException { dst: Reg },
    Return { src: Option<Reg> },
    Const { dst: Reg, value: i64, wide: bool },
    ConstString { dst: Reg, value: String },
    ConstClass { dst: Reg, class: String },
    CheckCast { reg: Reg, ty: String },
    InstanceOf { dst: Reg, src: Reg, ty: String },
    ArrayLength { dst: Reg, array: Reg },
    NewInstance { dst: Reg, class: String },
    NewArray { dst: Reg, size: Reg, ty: String },
    FilledNewArray { args: Vec<Reg>, ty: String },
    FillArrayData { array: Reg, payload: String },
    Throw { src: Reg },
    Goto { target: String },
    Switch { src: Reg, payload: String },
    If { cond: String, a: Reg, b: Option<Reg>, target: String },
    ArrayGet { dst: Reg, array: Reg, index: Reg },
    ArrayPut { src: Reg, array: Reg, index: Reg },
    InstanceGet { dst: Reg, object: Reg, field: FieldRef },
    InstancePut { src: Reg, object: Reg, field: FieldRef },
    StaticGet { dst: Reg, field: FieldRef },
    StaticPut { src: Reg, field: FieldRef },
    Invoke { kind: InvokeKind, args: Vec<Reg>, method: MethodRef },
    Unary { op: String, dst: Reg, src: Reg },
    Binary { op: String, dst: Reg, a: Reg, b: Reg },
    BinaryLit { op: String, dst: Reg, src: Reg, lit: i64 },
    /// Anything outside the supported subset. Has no data-flow effect.
    Opaque { opcode: String, operands: String },
}

#[derive(Debug, Clone)]
pub struct Instruction {
    pub op: Op,
    /// 1-based line in the smali file.
    pub file_line: u32,
    /// Java source line from the closest preceding `.line` directive.
    pub java_line: Option<u32>,
}

// File position is evidence metadata, not identity.
impl PartialEq for Instruction {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op && self.java_line == other.java_line
    }
}

impl Op {
    /// Registers written by this instruction (wide pairs included).
    pub fn defs(&self) -> Vec<Reg> {
        match self {
            Op::Move { dst, wide, .. } | Op::MoveResult { dst, wide } | Op::Const { dst, wide, .. } => {
                if *wide {
                    vec![*dst, dst + 1]
                } else {
                    vec![*dst]
                }
            }
            Op::MoveException { dst }
            | Op::ConstString { dst, .. }
            | Op::ConstClass { dst, .. }
            | Op::InstanceOf { dst, .. }
            | Op::ArrayLength { dst, .. }
            | Op::NewInstance { dst, .. }
            | Op::NewArray { dst, .. }
            | Op::ArrayGet { dst, .. }
            | Op::InstanceGet { dst, .. }
            | Op::StaticGet { dst, .. }
            | Op::Unary { dst, .. }
            | Op::Binary { dst, .. }
            | Op::BinaryLit { dst, .. } => vec![*dst],
            _ => Vec::new(),
        }
    }

    /// Registers read by this instruction.
    pub fn uses(&self) -> Vec<Reg> {
        match self {
            Op::Move { src, .. } => vec![*src],
            Op::Return { src: Some(r) } => vec![*r],
            Op::CheckCast { reg, .. } => vec![*reg],
            Op::InstanceOf { src, .. } => vec![*src],
            Op::ArrayLength { array, .. } => vec![*array],
            Op::NewArray { size, .. } => vec![*size],
            Op::FilledNewArray { args, .. } => args.clone(),
            Op::FillArrayData { array, .. } => vec![*array],
            Op::Throw { src } | Op::Switch { src, .. } => vec![*src],
            Op::If { a, b, .. } => {
                let mut v = vec![*a];
                v.extend(b.iter().copied());
                v
            }
            Op::ArrayGet { array, index, .. } => vec![*array, *index],
            Op::ArrayPut { src, array, index } => vec![*src, *array, *index],
            Op::InstanceGet { object, .. } => vec![*object],
            Op::InstancePut { src, object, .. } => vec![*src, *object],
            Op::StaticPut { src, .. } => vec![*src],
            Op::Invoke { args, .. } => args.clone(),
            Op::Unary { src, .. } | Op::BinaryLit { src, .. } => vec![*src],
            Op::Binary { a, b, .. } => vec![*a, *b],
            _ => Vec::new(),
        }
    }

    pub fn branch_labels(&self) -> Vec<&str> {
        match self {
            Op::Goto { target } | Op::If { target, .. } => vec![target.as_str()],
            _ => Vec::new(),
        }
    }

    /// True if control never falls through to the next instruction.
    pub fn ends_flow(&self) -> bool {
        matches!(self, Op::Goto { .. } | Op::Return { .. } | Op::Throw { .. })
    }

    pub fn is_branch(&self) -> bool {
        matches!(
            self,
            Op::Goto { .. } | Op::If { .. } | Op::Switch { .. } | Op::Return { .. } | Op::Throw { .. }
        )
    }

    pub fn as_invoke(&self) -> Option<(InvokeKind, &[Reg], &MethodRef)> {
        match self {
            Op::Invoke { kind, args, method } => Some((*kind, args.as_slice(), method)),
            _ => None,
        }
    }
}

/// Splits invoke argument registers into the first register of each
/// parameter slot (`this` first for non-static calls).
pub fn arg_slots(kind: InvokeKind, args: &[Reg], method: &MethodRef) -> Vec<Reg> {
    let mut slots = Vec::new();
    let mut i = 0usize;
    if kind != InvokeKind::Static {
        if let Some(r) = args.first() {
            slots.push(*r);
        }
        i = 1;
    }
    for p in &method.parameters {
        if let Some(r) = args.get(i) {
            slots.push(*r);
        }
        i += types::word_size(p) as usize;
    }
    slots
}
