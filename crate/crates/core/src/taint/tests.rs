use super::*;
use crate::dataflow::consts::FieldConsts;
use crate::graph::build_call_graph;
use crate::resources::ManifestInfo;
use crate::smali::{parse_class, MethodKey, SmaliProgram};
use crate::tagging::{Locus, SensitiveCategory, SourceLine, TaggedVariable};
use crate::taxonomy::WeaknessType;

fn program(classes: &[&str]) -> SmaliProgram {
    SmaliProgram::from_classes(classes.iter().map(|t| parse_class(t).unwrap()))
}

/// Source at the `move-result` following the first `findViewById` in `method`.
fn source_in(p: &SmaliProgram, class: &str, method: &str) -> TaggedVariable {
    let c = p.class(class).unwrap();
    let m = c.methods_named(method).next().unwrap();
    let i = m
        .instructions
        .iter()
        .position(|x| x.op.as_invoke().is_some_and(|(_, _, r)| r.name == "findViewById"))
        .unwrap();
    let crate::smali::Op::MoveResult { dst, .. } = m.instructions[i + 1].op else { panic!("no move-result") };
    TaggedVariable {
        method: MethodKey::of(c, m),
        locus: Locus::Register { reg: dst, at: i + 1 },
        keyword: "password".into(),
        category: SensitiveCategory::Credential,
        view_id: "edit_pwd".into(),
        binding_site: SourceLine { file: c.display_path(), line: 0, java_line: None },
        result_index: i + 1,
        result_reg: dst,
    }
}

fn run(p: &SmaliProgram, sources: &[TaggedVariable]) -> Vec<(WeaknessType, String)> {
    let cg = build_call_graph(p, &ManifestInfo::default());
    let fields = FieldConsts::compute(p);
    let g = Supergraph::build(p, &cg, &fields);
    let out = forward_taint(g, sources, &SinkCatalog::builtin(), &fields, TaintConfig::default());
    for f in &out.flows {
        assert!(out.facts.replay(f), "witness does not replay: {f:?}");
    }
    out.flows.iter().map(|f| (f.weakness(), f.sink_method.name.clone())).collect()
}

const PREFS: &str = r#"
.class public Lcom/bank/Login;
.super Landroid/app/Activity;
.method public save()V
    .registers 6
    const v0, 0x7f080001
    invoke-virtual {p0, v0}, Lcom/bank/Login;->findViewById(I)Landroid/view/View;
    move-result-object v0
    check-cast v0, Landroid/widget/EditText;
    invoke-virtual {v0}, Landroid/widget/EditText;->getText()Landroid/text/Editable;
    move-result-object v1
    invoke-virtual {v1}, Ljava/lang/Object;->toString()Ljava/lang/String;
    move-result-object v1
    const-string v2, "PasswordPrefs"
    const/4 v3, 0x0
    invoke-virtual {p0, v2, v3}, Lcom/bank/Login;->getSharedPreferences(Ljava/lang/String;I)Landroid/content/SharedPreferences;
    move-result-object v2
    invoke-interface {v2}, Landroid/content/SharedPreferences;->edit()Landroid/content/SharedPreferences$Editor;
    move-result-object v2
    const-string v3, "pwd"
    invoke-interface {v2, v3, v1}, Landroid/content/SharedPreferences$Editor;->putString(Ljava/lang/String;Ljava/lang/String;)Landroid/content/SharedPreferences$Editor;
    const-string v4, "menu_title"
    invoke-interface {v2, v3, v4}, Landroid/content/SharedPreferences$Editor;->putString(Ljava/lang/String;Ljava/lang/String;)Landroid/content/SharedPreferences$Editor;
    return-void
.end method
"#;

#[test]
fn password_into_shared_preferences() {
    let p = program(&[PREFS]);
    let src = source_in(&p, "Lcom/bank/Login;", "save");
    assert_eq!(run(&p, &[src]), vec![(WeaknessType::SharedPreference, "save".to_string())]);
}

#[test]
fn no_sources_no_flows() {
    let p = program(&[PREFS]);
    assert!(run(&p, &[]).is_empty());
}

#[test]
fn constant_overwrite_kills_taint() {
    let text = r#"
.class public Lcom/bank/A;
.super Landroid/app/Activity;
.method public f()V
    .registers 4
    const v0, 0x7f080001
    invoke-virtual {p0, v0}, Lcom/bank/A;->findViewById(I)Landroid/view/View;
    move-result-object v1
    move-object v2, v1
    const-string v1, "safe"
    const-string v0, "tag"
    invoke-static {v0, v1}, Landroid/util/Log;->d(Ljava/lang/String;Ljava/lang/String;)I
    invoke-static {v0, v2}, Landroid/util/Log;->w(Ljava/lang/String;Ljava/lang/String;)I
    return-void
.end method
"#;
    let p = program(&[text]);
    let src = source_in(&p, "Lcom/bank/A;", "f");
    let names: Vec<_> = run(&p, &[src]);
    assert_eq!(names.len(), 1);
    let cg = build_call_graph(&p, &ManifestInfo::default());
    let fields = FieldConsts::compute(&p);
    let g = Supergraph::build(&p, &cg, &fields);
    let out = forward_taint(g, &[source_in(&p, "Lcom/bank/A;", "f")], &SinkCatalog::builtin(), &fields, TaintConfig::default());
    assert_eq!(out.flows[0].sink_index, 7);
}

#[test]
fn field_flow_across_methods_and_calls() {
    let text = r#"
.class public Lcom/bank/B;
.super Landroid/app/Activity;
.field private pin:Ljava/lang/String;
.method public onCreate(Landroid/os/Bundle;)V
    .registers 4
    const v0, 0x7f080002
    invoke-virtual {p0, v0}, Lcom/bank/B;->findViewById(I)Landroid/view/View;
    move-result-object v0
    invoke-virtual {v0}, Landroid/view/View;->toString()Ljava/lang/String;
    move-result-object v1
    iput-object v1, p0, Lcom/bank/B;->pin:Ljava/lang/String;
    return-void
.end method
.method public onPause()V
    .registers 3
    iget-object v0, p0, Lcom/bank/B;->pin:Ljava/lang/String;
    invoke-static {v0}, Lcom/bank/B;->wrap(Ljava/lang/String;)Ljava/lang/String;
    move-result-object v0
    const-string v1, "B"
    invoke-static {v1, v0}, Landroid/util/Log;->i(Ljava/lang/String;Ljava/lang/String;)I
    return-void
.end method
.method static wrap(Ljava/lang/String;)Ljava/lang/String;
    .registers 2
    new-instance v0, Ljava/lang/StringBuilder;
    invoke-direct {v0}, Ljava/lang/StringBuilder;-><init>()V
    invoke-virtual {v0, p0}, Ljava/lang/StringBuilder;->append(Ljava/lang/String;)Ljava/lang/StringBuilder;
    invoke-virtual {v0}, Ljava/lang/StringBuilder;->toString()Ljava/lang/String;
    move-result-object v0
    return-object v0
.end method
"#;
    let p = program(&[text]);
    let src = source_in(&p, "Lcom/bank/B;", "onCreate");
    assert_eq!(run(&p, &[src]), vec![(WeaknessType::Logging, "onPause".to_string())]);
}

#[test]
fn implicit_versus_explicit_intent() {
    let text = r#"
.class public Lcom/bank/C;
.super Landroid/app/Activity;
.method public send()V
    .registers 6
    const v0, 0x7f080003
    invoke-virtual {p0, v0}, Lcom/bank/C;->findViewById(I)Landroid/view/View;
    move-result-object v0
    new-instance v1, Landroid/content/Intent;
    const-string v2, "com.bank.ACTION_PAY"
    invoke-direct {v1, v2}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    const-string v3, "pin"
    invoke-virtual {v1, v3, v0}, Landroid/content/Intent;->putExtra(Ljava/lang/String;Ljava/lang/String;)Landroid/content/Intent;
    invoke-virtual {p0, v1}, Lcom/bank/C;->sendBroadcast(Landroid/content/Intent;)V
    new-instance v4, Landroid/content/Intent;
    const-class v5, Lcom/bank/D;
    invoke-direct {v4, p0, v5}, Landroid/content/Intent;-><init>(Landroid/content/Context;Ljava/lang/Class;)V
    invoke-virtual {v4, v3, v0}, Landroid/content/Intent;->putExtra(Ljava/lang/String;Ljava/lang/String;)Landroid/content/Intent;
    invoke-virtual {p0, v4}, Lcom/bank/C;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
"#;
    let d = r#"
.class public Lcom/bank/D;
.super Landroid/app/Activity;
.method public onCreate(Landroid/os/Bundle;)V
    .registers 4
    invoke-virtual {p0}, Lcom/bank/D;->getIntent()Landroid/content/Intent;
    move-result-object v0
    const-string v1, "pin"
    invoke-virtual {v0, v1}, Landroid/content/Intent;->getStringExtra(Ljava/lang/String;)Ljava/lang/String;
    move-result-object v0
    const-string v2, "D"
    invoke-static {v2, v0}, Landroid/util/Log;->e(Ljava/lang/String;Ljava/lang/String;)I
    return-void
.end method
"#;
    let p = program(&[text, d]);
    let src = source_in(&p, "Lcom/bank/C;", "send");
    let got = run(&p, &[src]);
    assert_eq!(
        got,
        vec![(WeaknessType::IccImplicitIntent, "send".to_string()), (WeaknessType::Logging, "onCreate".to_string())]
    );
}

#[test]
fn sd_card_requires_external_path() {
    let text = r#"
.class public Lcom/bank/E;
.super Landroid/app/Activity;
.method public dump()V
    .registers 6
    const v0, 0x7f080004
    invoke-virtual {p0, v0}, Lcom/bank/E;->findViewById(I)Landroid/view/View;
    move-result-object v0
    invoke-virtual {v0}, Ljava/lang/Object;->toString()Ljava/lang/String;
    move-result-object v0
    invoke-virtual {v0}, Ljava/lang/String;->getBytes()[B
    move-result-object v0
    invoke-static {}, Landroid/os/Environment;->getExternalStorageDirectory()Ljava/io/File;
    move-result-object v1
    new-instance v2, Ljava/io/File;
    const-string v3, "history.dat"
    invoke-direct {v2, v1, v3}, Ljava/io/File;-><init>(Ljava/io/File;Ljava/lang/String;)V
    new-instance v4, Ljava/io/FileOutputStream;
    invoke-direct {v4, v2}, Ljava/io/FileOutputStream;-><init>(Ljava/io/File;)V
    invoke-virtual {v4, v0}, Ljava/io/FileOutputStream;->write([B)V
    const-string v3, "internal.dat"
    const/4 v5, 0x0
    invoke-virtual {p0, v3, v5}, Lcom/bank/E;->openFileOutput(Ljava/lang/String;I)Ljava/io/FileOutputStream;
    move-result-object v4
    invoke-virtual {v4, v0}, Ljava/io/FileOutputStream;->write([B)V
    return-void
.end method
"#;
    let p = program(&[text]);
    let src = source_in(&p, "Lcom/bank/E;", "dump");
    let cg = build_call_graph(&p, &ManifestInfo::default());
    let fields = FieldConsts::compute(&p);
    let g = Supergraph::build(&p, &cg, &fields);
    let out = forward_taint(g, &[src], &SinkCatalog::builtin(), &fields, TaintConfig::default());
    let hits: Vec<_> = out.flows.iter().map(|f| (f.weakness(), f.sink_index)).collect();
    assert_eq!(hits, vec![(WeaknessType::SdCard, 14)]);
}

#[test]
fn budget_exhaustion_is_reported() {
    let p = program(&[PREFS]);
    let src = source_in(&p, "Lcom/bank/Login;", "save");
    let cg = build_call_graph(&p, &ManifestInfo::default());
    let fields = FieldConsts::compute(&p);
    let g = Supergraph::build(&p, &cg, &fields);
    let out = forward_taint(g, &[src], &SinkCatalog::builtin(), &fields, TaintConfig { budget: 3 });
    assert!(out.facts.truncated);
    assert_eq!(out.facts.diagnostics.len(), 1);
}

#[test]
fn hard_coded_key_candidates() {
    let text = r#"
.class public Lcom/bank/K;
.super Ljava/lang/Object;
.method public static enc(Ljava/lang/String;)[B
    .registers 6
    const-string v0, "0123456789abcdef"
    invoke-virtual {v0}, Ljava/lang/String;->getBytes()[B
    move-result-object v0
    new-instance v1, Ljavax/crypto/spec/SecretKeySpec;
    const-string v2, "AES"
    invoke-direct {v1, v0, v2}, Ljavax/crypto/spec/SecretKeySpec;-><init>([BLjava/lang/String;)V
    new-instance v3, Ljavax/crypto/spec/SecretKeySpec;
    invoke-virtual {p0}, Ljava/lang/String;->getBytes()[B
    move-result-object v4
    invoke-direct {v3, v4, v2}, Ljavax/crypto/spec/SecretKeySpec;-><init>([BLjava/lang/String;)V
    return-object v0
.end method
"#;
    let p = program(&[text]);
    let cg = build_call_graph(&p, &ManifestInfo::default());
    let fields = FieldConsts::compute(&p);
    let g = Supergraph::build(&p, &cg, &fields);
    let facts = TaintFacts::compute(g, &[], &fields, TaintConfig::default());
    assert_eq!(facts.key_candidates.len(), 1);
    assert_eq!(facts.key_candidates[0].literal.as_deref(), Some("0123456789abcdef"));
    assert_eq!(facts.key_candidates[0].constructor, "SecretKeySpec");
}
